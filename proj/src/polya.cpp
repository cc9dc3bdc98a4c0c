#include "polycert/polya.hpp"

#include <cmath>

#include "polycert/util.hpp"

namespace polycert {

namespace {

DegreeVector plus_scalar(const DegreeVector& d, int s) {
  DegreeVector out = d;
  for (int& v : out) v += s;
  return out;
}

// One convolution step: level[gamma] = sum over unit moves in every group
// of prev[gamma - lambda]. T is Eigen::VectorXd for beta columns or
// std::vector<MatrixXd> for H columns; `add` folds prev column into acc.
template <typename Col, typename InitFn, typename AddFn>
std::vector<Col> convolution_step(const MultiExponentSet& prev_set,
                                  const MultiExponentSet& next_set,
                                  const std::vector<Col>& prev,
                                  InitFn make_zero, AddFn add,
                                  WorkerPool* pool) {
  std::vector<Col> next(static_cast<size_t>(next_set.size()));
  const int groups = next_set.groups();
  auto work = [&](int flat) {
    Col acc = make_zero();
    std::vector<int> pos = next_set.decode(flat);
    // enumerate one unit subtraction per group
    std::vector<Exponent> gexp(groups);
    for (int g = 0; g < groups; ++g) gexp[g] = next_set.group(g)[pos[g]];
    std::vector<int> choice(groups, 0);
    while (true) {
      bool ok = true;
      std::vector<int> ppos(groups);
      for (int g = 0; g < groups && ok; ++g) {
        Exponent e = gexp[g];
        e[choice[g]] -= 1;
        int p = prev_set.group(g).position(e);
        if (p < 0)
          ok = false;
        else
          ppos[g] = p;
      }
      if (ok) add(acc, prev[size_t(prev_set.encode(ppos))]);
      int g = groups - 1;
      while (g >= 0) {
        choice[g] += 1;
        if (choice[g] < next_set.group(g).l()) break;
        choice[g] = 0;
        --g;
      }
      if (g < 0) break;
    }
    next[size_t(flat)] = std::move(acc);
  };
  WorkerPool serial(1);
  (pool ? pool : &serial)->run_blocks(int(next_set.size()), work);
  return next;
}

void log_beta_level(SetupStats* stats, WorkerPool* pool, long long cols,
                    long long L0) {
  if (!stats) return;
  int N = pool ? pool->workers() : 1;
  stats->ensure(N);
  Partition p = partition_blocks(int(cols), std::min<long long>(N, cols));
  for (int w = 0; w < int(p.ranges.size()); ++w)
    stats->add_beta(w, (p.ranges[w].second - p.ranges[w].first) * L0);
}

void log_h_level(SetupStats* stats, WorkerPool* pool, long long cols,
                 long long L0, int n) {
  if (!stats) return;
  int N = pool ? pool->workers() : 1;
  stats->ensure(N);
  Partition p = partition_blocks(int(cols), std::min<long long>(N, cols));
  for (int w = 0; w < int(p.ranges.size()); ++w)
    stats->add_h(w, (p.ranges[w].second - p.ranges[w].first) * L0 *
                        (long long)(n) * n);
}

}  // namespace

BetaTable compute_beta_multi(const std::vector<int>& group_sizes,
                             const DegreeVector& Dp, int d1, WorkerPool* pool,
                             SetupStats* stats) {
  if (group_sizes.size() != Dp.size())
    throw Error("compute_beta_multi: group/degree mismatch");
  BetaTable t;
  t.h_set = MultiExponentSet(group_sizes, Dp);
  const long long L0 = t.h_set.size();
  MultiExponentSet level_set = t.h_set;
  std::vector<Eigen::VectorXd> cols(static_cast<size_t>(L0));
  for (long long i = 0; i < L0; ++i) {
    cols[size_t(i)] = Eigen::VectorXd::Zero(L0);
    cols[size_t(i)][i] = 1.0;
  }
  for (int i = 1; i <= d1; ++i) {
    MultiExponentSet next_set(group_sizes, plus_scalar(Dp, i));
    cols = convolution_step<Eigen::VectorXd>(
        level_set, next_set, cols,
        [&] { return Eigen::VectorXd::Zero(L0).eval(); },
        [](Eigen::VectorXd& acc, const Eigen::VectorXd& src) { acc += src; },
        pool);
    level_set = next_set;
    log_beta_level(stats, pool, level_set.size(), L0);
  }
  if (d1 == 0) log_beta_level(stats, pool, level_set.size(), L0);
  t.gamma_set = level_set;
  t.cols = std::move(cols);
  return t;
}

BetaTable compute_beta(int l, int dp, int d1, WorkerPool* pool,
                       SetupStats* stats) {
  return compute_beta_multi({l}, {dp}, d1, pool, stats);
}

HTable compute_H_multi(const MatrixPolynomial& A, const DegreeVector& Dp,
                       int d2, WorkerPool* pool, SetupStats* stats) {
  DegreeVector Da;
  if (!A.is_multi_homogeneous(&Da))
    throw Error("compute_H_multi: A must be multi-homogeneous");
  if (A.empty()) Da.assign(A.groups().size(), 0);
  if (Da.size() != Dp.size())
    throw Error("compute_H_multi: degree vector mismatch");
  std::vector<int> group_sizes;
  for (const auto& g : A.groups()) group_sizes.push_back(g.size);

  HTable t;
  t.n = A.n();
  t.h_set = MultiExponentSet(group_sizes, Dp);
  const long long L0 = t.h_set.size();
  DegreeVector Dpa(Dp.size());
  for (size_t i = 0; i < Dp.size(); ++i) Dpa[i] = Dp[i] + Da[i];
  MultiExponentSet level_set(group_sizes, Dpa);

  const int n = A.n();
  std::vector<std::vector<Eigen::MatrixXd>> cols(static_cast<size_t>(level_set.size()));
  {
    auto init = [&](int flat) {
      std::vector<Eigen::MatrixXd> col(
          static_cast<size_t>(L0), Eigen::MatrixXd::Zero(n, n));
      Exponent gamma = level_set.concatenated(flat);
      for (long long h = 0; h < L0; ++h) {
        Exponent he = t.h_set.concatenated(h);
        Exponent diff(gamma.size());
        bool ok = true;
        for (size_t i = 0; i < gamma.size(); ++i) {
          diff[i] = gamma[i] - he[i];
          if (diff[i] < 0) ok = false;
        }
        if (ok) col[size_t(h)] = A.coeff(diff);
      }
      cols[size_t(flat)] = std::move(col);
    };
    WorkerPool serial(1);
    (pool ? pool : &serial)->run_blocks(int(level_set.size()), init);
  }
  for (int i = 1; i <= d2; ++i) {
    MultiExponentSet next_set(group_sizes, plus_scalar(Dpa, i));
    cols = convolution_step<std::vector<Eigen::MatrixXd>>(
        level_set, next_set, cols,
        [&] {
          return std::vector<Eigen::MatrixXd>(size_t(L0),
                                              Eigen::MatrixXd::Zero(n, n));
        },
        [](std::vector<Eigen::MatrixXd>& acc,
           const std::vector<Eigen::MatrixXd>& src) {
          for (size_t k = 0; k < acc.size(); ++k) acc[k] += src[k];
        },
        pool);
    level_set = next_set;
    log_h_level(stats, pool, level_set.size(), L0, n);
  }
  if (d2 == 0) log_h_level(stats, pool, level_set.size(), L0, n);
  t.gamma_set = level_set;
  t.cols = std::move(cols);
  return t;
}

HTable compute_H(const MatrixPolynomial& A, int l, int dp, int da, int d2,
                 WorkerPool* pool, SetupStats* stats) {
  if (A.groups().size() != 1 || A.groups()[0].size != l)
    throw Error("compute_H: single group of size l expected");
  if (!A.empty() && (!A.is_homogeneous() || A.total_degree() != da))
    throw Error("compute_H: A is not homogeneous of the declared degree");
  if (A.empty()) {
    // all-zero input: zero table at the declared degree
    HTable t;
    t.n = A.n();
    t.h_set = MultiExponentSet({l}, {dp});
    t.gamma_set = MultiExponentSet({l}, {dp + da + d2});
    t.cols.assign(size_t(t.gamma_set.size()),
                  std::vector<Eigen::MatrixXd>(
                      size_t(t.h_set.size()),
                      Eigen::MatrixXd::Zero(A.n(), A.n())));
    return t;
  }
  return compute_H_multi(A, {dp}, d2, pool, stats);
}

std::vector<Eigen::MatrixXd> sym_basis(int n) {
  std::vector<Eigen::MatrixXd> basis;
  for (int j = 0; j < n; ++j) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
    e(j, j) = 1.0;
    basis.push_back(e);
  }
  for (int off = 1; off < n; ++off) {
    for (int a = 0; a + off < n; ++a) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
      e(a, a + off) = 1.0;
      e(a + off, a) = 1.0;
      basis.push_back(e);
    }
  }
  return basis;
}

namespace {

SdpProblem assemble_from_tables(const BetaTable& beta, const HTable& H,
                                const Eigen::VectorXd& c_weights, int n,
                                double delta, WorkerPool* pool) {
  if (delta <= 0.0) throw Error("assemble_sdp: delta must be positive");
  const long long L = beta.gamma_set.size();
  const long long M = H.gamma_set.size();
  const long long L0 = beta.h_set.size();
  const int Ntil = n * (n + 1) / 2;
  const long long K = L0 * Ntil;

  SdpProblem prob;
  prob.structure.L = int(L);
  prob.structure.M = int(M);
  prob.structure.n = n;
  prob.structure.sizes.assign(size_t(L + M), n);
  prob.p_exponents = beta.h_set;

  prob.C.assign(size_t(L + M), Eigen::MatrixXd::Zero(n, n));
  {
    auto work = [&](int j) {
      if (j < L)
        prob.C[size_t(j)] =
            delta * c_weights[j] * Eigen::MatrixXd::Identity(n, n);
    };
    WorkerPool serial(1);
    (pool ? pool : &serial)->run_blocks(int(L + M), work);
  }

  const auto basis = sym_basis(n);
  prob.B.assign(size_t(K), {});
  {
    auto work = [&](int i) {
      const long long h = i / Ntil;
      const int jp = i % Ntil;
      const Eigen::MatrixXd& E = basis[size_t(jp)];
      auto& list = prob.B[size_t(i)];
      for (long long j = 0; j < L; ++j) {
        double b = beta.at(h, j);
        if (b != 0.0) list.emplace_back(int(j), b * E);
      }
      for (long long m = 0; m < M; ++m) {
        const Eigen::MatrixXd& Hm = H.at(h, m);
        if (!Hm.isZero(0.0))
          list.emplace_back(int(L + m),
                            (-(Hm.transpose() * E + E * Hm)).eval());
      }
    };
    WorkerPool serial(1);
    (pool ? pool : &serial)->run_blocks(int(K), work);
  }
  prob.a = Eigen::VectorXd::Ones(K);
  return prob;
}

}  // namespace

SdpProblem assemble_sdp(int dp, const MatrixPolynomial& A, int d1, int d2,
                        double delta, WorkerPool* pool, SetupStats* stats) {
  if (A.groups().size() != 1)
    throw Error("assemble_sdp: single variable group expected");
  if (!A.is_homogeneous())
    throw Error("assemble_sdp: A must be homogeneous");
  const int l = A.groups()[0].size;
  const int n = A.n();
  BetaTable beta = compute_beta(l, dp, d1, pool, stats);
  HTable H = compute_H(A, l, dp, A.total_degree(), d2, pool, stats);
  // C_j weight: sum_h beta_{h,j} * dp! / prod(h!)
  Eigen::VectorXd w(beta.gamma_set.size());
  for (long long j = 0; j < beta.gamma_set.size(); ++j) {
    double acc = 0.0;
    for (long long h = 0; h < beta.h_set.size(); ++h) {
      Exponent he = beta.h_set.concatenated(h);
      acc += beta.at(h, j) *
             multinomial(dp, std::vector<int>(he.begin(), he.end()));
    }
    w[j] = acc;
  }
  return assemble_from_tables(beta, H, w, n, delta, pool);
}

SdpProblem assemble_sdp_multi(const DegreeVector& Dp,
                              const MatrixPolynomial& A, int d1, int d2,
                              double delta, WorkerPool* pool,
                              SetupStats* stats) {
  DegreeVector Da;
  if (!A.is_multi_homogeneous(&Da))
    throw Error("assemble_sdp_multi: A must be multi-homogeneous");
  std::vector<int> group_sizes;
  for (const auto& g : A.groups()) group_sizes.push_back(g.size);
  if (group_sizes.size() != Dp.size())
    throw Error("assemble_sdp_multi: degree vector mismatch");
  BetaTable beta = compute_beta_multi(group_sizes, Dp, d1, pool, stats);
  HTable H = compute_H_multi(A, Dp, d2, pool, stats);
  // zeta weights: product over groups of multinomial(dp_g + d1; gamma_g)
  Eigen::VectorXd w(beta.gamma_set.size());
  for (long long j = 0; j < beta.gamma_set.size(); ++j) {
    auto pos = beta.gamma_set.decode(j);
    double acc = 1.0;
    for (int g = 0; g < beta.gamma_set.groups(); ++g) {
      const Exponent& ge = beta.gamma_set.group(g)[pos[g]];
      acc *= multinomial(Dp[size_t(g)] + d1,
                         std::vector<int>(ge.begin(), ge.end()));
    }
    w[j] = acc;
  }
  return assemble_from_tables(beta, H, w, A.n(), delta, pool);
}

MatrixPolynomial recover_P(const SdpProblem& prob, const Eigen::VectorXd& y) {
  const int n = prob.structure.n;
  const int Ntil = n * (n + 1) / 2;
  const auto basis = sym_basis(n);
  std::vector<VarGroup> groups;
  for (int g = 0; g < prob.p_exponents.groups(); ++g)
    groups.push_back({"a" + std::to_string(g + 1),
                      prob.p_exponents.group(g).l()});
  MatrixPolynomial P(groups, n);
  for (long long h = 0; h < prob.p_exponents.size(); ++h) {
    Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < Ntil; ++j) coeff += basis[size_t(j)] * y[h * Ntil + j];
    P.add_term(prob.p_exponents.concatenated(h), coeff);
  }
  return P;
}

SimplexMinResult min_poly_over_simplex(const MatrixPolynomial& f, int e_max,
                                       double gamma_lo, double gamma_hi,
                                       int b_max) {
  if (f.n() != 1) throw Error("min_poly_over_simplex: scalar input expected");
  if (gamma_lo > gamma_hi) throw Error("min_poly_over_simplex: bad bracket");
  MatrixPolynomial h = f.is_homogeneous() ? f : homogenize_simplex(f);
  const int d = h.total_degree();
  MatrixPolynomial simplex_d =
      simplex_form_power(h.groups(), 0, d, 1);

  auto certified = [&](double gamma, int* used_e) {
    MatrixPolynomial g = h - simplex_d.scaled(gamma);
    MatrixPolynomial product = g;
    MatrixPolynomial step = simplex_form_power(h.groups(), 0, 1, 1);
    for (int e = 0; e <= e_max; ++e) {
      bool all_positive = !product.empty();
      for (const auto& [exp, c] : product.terms())
        if (c(0, 0) <= 0.0) {
          all_positive = false;
          break;
        }
      if (all_positive) {
        if (used_e) *used_e = e;
        return true;
      }
      if (e < e_max) product = product * step;
    }
    return false;
  };

  SimplexMinResult res;
  res.bound = gamma_lo;
  double lo = gamma_lo, hi = gamma_hi;
  for (int k = 0; k < b_max; ++k) {
    double mid = 0.5 * (lo + hi);
    int used = 0;
    if (certified(mid, &used)) {
      lo = mid;
      res.bound = mid;
      res.final_e = std::max(res.final_e, used);
    } else {
      hi = mid;
    }
    ++res.iterations;
  }
  return res;
}

GlobalTestReport global_nonnegativity_tests(const MatrixPolynomial& f,
                                            int e_max) {
  if (f.n() != 1)
    throw Error("global_nonnegativity_tests: scalar input expected");
  GlobalTestReport report;
  const int nv = f.num_vars();

  // Habicht: multiply by (sum x_i^2)^e until the product is a sum of
  // squares of monomials (positive coefficients on even exponents only).
  report.habicht_applicable = f.is_homogeneous() && !f.empty();
  if (report.habicht_applicable) {
    MatrixPolynomial sq(f.groups(), 1);
    for (int i = 0; i < nv; ++i) {
      Exponent e(nv, 0);
      e[i] = 2;
      sq.add_term(e, Eigen::MatrixXd::Ones(1, 1));
    }
    MatrixPolynomial product = f;
    for (int e = 0; e <= e_max; ++e) {
      bool monomial_sos = true;
      for (const auto& [exp, c] : product.terms()) {
        if (c(0, 0) <= 0.0) {
          monomial_sos = false;
          break;
        }
        for (int v : exp)
          if (v % 2 != 0) {
            monomial_sos = false;
            break;
          }
        if (!monomial_sos) break;
      }
      if (monomial_sos) {
        report.habicht_e = e;
        break;
      }
      if (e < e_max) product = product * sq;
    }
  }

  // Orthant test: multiply by (1 + e'x)^lambda and check the sign pattern
  // sgn(c_alpha) = prod e_i^{alpha_i}. Homogeneous inputs also admit the
  // homogeneous multiplier (e'x)^lambda, which is positive on the open cone.
  const double tol = 1e-12;
  auto has_pattern = [&](const MatrixPolynomial& product,
                         const std::vector<int>& signs) {
    for (const auto& [exp, c] : product.terms()) {
      double v = c(0, 0);
      if (std::abs(v) <= tol) continue;
      double want = 1.0;
      for (int i = 0; i < nv; ++i)
        if (exp[i] % 2 == 1 && signs[i] < 0) want = -want;
      if ((v > 0) != (want > 0)) return false;
    }
    return true;
  };
  for (long long mask = 0; mask < (1LL << nv); ++mask) {
    OrthantVerdict verdict;
    verdict.signs.resize(nv);
    for (int i = 0; i < nv; ++i)
      verdict.signs[i] = (mask >> i) & 1 ? -1 : 1;
    MatrixPolynomial affine(f.groups(), 1);
    affine.add_term(Exponent(nv, 0), Eigen::MatrixXd::Ones(1, 1));
    MatrixPolynomial homog(f.groups(), 1);
    for (int i = 0; i < nv; ++i) {
      Exponent e(nv, 0);
      e[i] = 1;
      Eigen::MatrixXd s =
          double(verdict.signs[i]) * Eigen::MatrixXd::Ones(1, 1);
      affine.add_term(e, s);
      homog.add_term(e, s);
    }
    MatrixPolynomial prod_affine = f;
    MatrixPolynomial prod_homog = f;
    const bool try_homog = f.is_homogeneous();
    for (int lambda = 0; lambda <= e_max; ++lambda) {
      if (has_pattern(prod_affine, verdict.signs) ||
          (try_homog && has_pattern(prod_homog, verdict.signs))) {
        verdict.lambda = lambda;
        break;
      }
      if (lambda < e_max) {
        prod_affine = prod_affine * affine;
        if (try_homog) prod_homog = prod_homog * homog;
      }
    }
    report.orthants.push_back(verdict);
  }
  report.nonnegative_on_Rn = true;
  for (const auto& v : report.orthants)
    if (v.lambda < 0) report.nonnegative_on_Rn = false;
  return report;
}

}  // namespace polycert
