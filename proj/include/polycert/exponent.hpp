#ifndef POLYCERT_EXPONENT_HPP
#define POLYCERT_EXPONENT_HPP

#include <cstdint>
#include <map>
#include <vector>

namespace polycert {

// Exponent vector of an l-variate monomial.
using Exponent = std::vector<int>;

// Monomial order used throughout: gamma precedes eta when the leftmost
// nonzero entry of gamma - eta is positive.
struct LexBefore {
  bool operator()(const Exponent& a, const Exponent& b) const;
};

int degree(const Exponent& e);

// Number of l-variate monomials of degree d; zero when l == 0.
long long monomial_count(int l, int d);

// All exponents in N^l with entries summing to d, in lex order.
std::vector<Exponent> exponent_set(int l, int d);

// All exponents in N^l with degree <= d, ascending tuple order.
std::vector<Exponent> exponents_up_to(int l, int d);

// 1-based lexicographic index within exponent_set(l, sum(gamma)).
// Closed-form; throws if sum(gamma) != d.
long long lex_index(const Exponent& gamma, int d);

// Inverse of lex_index for exponent_set(l, d).
Exponent lex_exponent(int l, int d, long long index);

// Lookup table mapping exponents of W_d to zero-based positions.
class ExponentSet {
 public:
  ExponentSet() = default;
  ExponentSet(int l, int d);

  int l() const { return l_; }
  int d() const { return d_; }
  int size() const { return int(members_.size()); }
  const Exponent& operator[](int i) const { return members_[i]; }
  const std::vector<Exponent>& members() const { return members_; }
  // Zero-based position, or -1 when absent (e.g. negative entries).
  int position(const Exponent& e) const;

 private:
  int l_ = 0;
  int d_ = 0;
  std::vector<Exponent> members_;
  std::map<Exponent, int, LexBefore> index_;
};

// Multi-index over a product of exponent sets, one per variable group.
// Enumeration order: group 0 varies slowest.
class MultiExponentSet {
 public:
  MultiExponentSet() = default;
  MultiExponentSet(const std::vector<int>& group_sizes,
                   const std::vector<int>& degrees);

  long long size() const { return total_; }
  int groups() const { return int(sets_.size()); }
  const ExponentSet& group(int i) const { return sets_[i]; }
  // Decode flat index into per-group positions.
  std::vector<int> decode(long long flat) const;
  long long encode(const std::vector<int>& positions) const;
  // Concatenated exponent vector for a flat index.
  Exponent concatenated(long long flat) const;
  // Flat index of a concatenated exponent; -1 when out of range.
  long long position_concat(const Exponent& concat) const;

 private:
  std::vector<ExponentSet> sets_;
  std::vector<long long> stride_;
  long long total_ = 0;
};

}  // namespace polycert

#endif
