#include "polycert/exponent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "polycert/util.hpp"

namespace polycert {

bool LexBefore::operator()(const Exponent& a, const Exponent& b) const {
  // a before b iff leftmost nonzero of a - b is positive,
  // i.e. a is larger in plain tuple comparison.
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

int degree(const Exponent& e) {
  return std::accumulate(e.begin(), e.end(), 0);
}

long long monomial_count(int l, int d) {
  if (l == 0) return 0;
  if (d < 0) return 0;
  return std::llround(binomial(l + d - 1, l - 1));
}

std::vector<Exponent> exponent_set(int l, int d) {
  std::vector<Exponent> out;
  if (l <= 0) return out;
  Exponent cur(l, 0);
  // Recursive enumeration already emits lex order: larger leading entry first.
  auto rec = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == l - 1) {
      cur[pos] = remaining;
      out.push_back(cur);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      cur[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  rec(rec, 0, d);
  return out;
}

std::vector<Exponent> exponents_up_to(int l, int d) {
  std::vector<Exponent> out;
  Exponent cur(l, 0);
  auto rec = [&](auto&& self, int pos, int budget) -> void {
    if (pos == l) {
      out.push_back(cur);
      return;
    }
    for (int v = 0; v <= budget; ++v) {
      cur[pos] = v;
      self(self, pos + 1, budget - v);
    }
    cur[pos] = 0;
  };
  rec(rec, 0, d);
  std::sort(out.begin(), out.end());
  return out;
}

long long lex_index(const Exponent& gamma, int d) {
  if (degree(gamma) != d)
    throw Error("lex_index: exponent degree does not match d");
  const int l = int(gamma.size());
  // Count the exponents that precede gamma: at position j every larger
  // leading value v contributes all completions of the remaining degree.
  long long before = 0;
  int consumed = 0;
  for (int j = 0; j < l - 1; ++j) {
    int rem = d - consumed;
    for (int v = rem; v > gamma[j]; --v)
      before += monomial_count(l - j - 1, rem - v);
    consumed += gamma[j];
  }
  return before + 1;
}

Exponent lex_exponent(int l, int d, long long index) {
  if (index < 1 || index > monomial_count(l, d))
    throw Error("lex_exponent: index out of range");
  Exponent out(l, 0);
  long long before = index - 1;
  int rem = d;
  for (int j = 0; j < l - 1; ++j) {
    for (int v = rem; v >= 0; --v) {
      long long cnt = monomial_count(l - j - 1, rem - v);
      if (before < cnt) {
        out[j] = v;
        rem -= v;
        break;
      }
      before -= cnt;
    }
  }
  out[l - 1] = rem;
  return out;
}

ExponentSet::ExponentSet(int l, int d) : l_(l), d_(d) {
  members_ = exponent_set(l, d);
  for (int i = 0; i < int(members_.size()); ++i) index_[members_[i]] = i;
}

int ExponentSet::position(const Exponent& e) const {
  for (int v : e)
    if (v < 0) return -1;
  auto it = index_.find(e);
  return it == index_.end() ? -1 : it->second;
}

MultiExponentSet::MultiExponentSet(const std::vector<int>& group_sizes,
                                   const std::vector<int>& degrees) {
  if (group_sizes.size() != degrees.size())
    throw Error("MultiExponentSet: group/degree count mismatch");
  const int n = int(group_sizes.size());
  sets_.reserve(n);
  for (int i = 0; i < n; ++i) sets_.emplace_back(group_sizes[i], degrees[i]);
  stride_.assign(n, 1);
  for (int i = n - 2; i >= 0; --i)
    stride_[i] = stride_[i + 1] * sets_[i + 1].size();
  total_ = n == 0 ? 0 : stride_[0] * sets_[0].size();
}

std::vector<int> MultiExponentSet::decode(long long flat) const {
  std::vector<int> pos(sets_.size());
  for (size_t i = 0; i < sets_.size(); ++i) {
    pos[i] = int(flat / stride_[i]);
    flat %= stride_[i];
  }
  return pos;
}

long long MultiExponentSet::encode(const std::vector<int>& positions) const {
  long long flat = 0;
  for (size_t i = 0; i < sets_.size(); ++i) flat += positions[i] * stride_[i];
  return flat;
}

Exponent MultiExponentSet::concatenated(long long flat) const {
  auto pos = decode(flat);
  Exponent out;
  for (size_t i = 0; i < sets_.size(); ++i) {
    const Exponent& e = sets_[i][pos[i]];
    out.insert(out.end(), e.begin(), e.end());
  }
  return out;
}

long long MultiExponentSet::position_concat(const Exponent& concat) const {
  std::vector<int> pos(sets_.size());
  size_t off = 0;
  for (size_t i = 0; i < sets_.size(); ++i) {
    Exponent part(concat.begin() + off, concat.begin() + off + sets_[i].l());
    off += sets_[i].l();
    int p = sets_[i].position(part);
    if (p < 0) return -1;
    pos[i] = p;
  }
  return encode(pos);
}

}  // namespace polycert
