#include "polycert/handelman.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "polycert/util.hpp"

namespace polycert {

bool Polytope::contains(const Eigen::VectorXd& x, double tol) const {
  return ((W * x + u).array() >= -tol).all();
}

Polytope Polytope::from_vertices_2d(const std::vector<Eigen::Vector2d>& verts) {
  if (verts.size() < 3) throw Error("from_vertices_2d: need >= 3 vertices");
  // order vertices by angle around the centroid
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& v : verts) c += v;
  c /= double(verts.size());
  std::vector<Eigen::Vector2d> ordered = verts;
  std::sort(ordered.begin(), ordered.end(),
            [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
              return std::atan2(a.y() - c.y(), a.x() - c.x()) <
                     std::atan2(b.y() - c.y(), b.x() - c.x());
            });
  const int k = int(ordered.size());
  Polytope p;
  p.W.resize(k, 2);
  p.u.resize(k);
  for (int i = 0; i < k; ++i) {
    Eigen::Vector2d a = ordered[size_t(i)];
    Eigen::Vector2d b = ordered[size_t((i + 1) % k)];
    Eigen::Vector2d edge = b - a;
    Eigen::Vector2d normal(-edge.y(), edge.x());  // inward for ccw order
    if (normal.dot(c - a) < 0) normal = -normal;
    double norm = normal.norm();
    if (norm < 1e-14) throw Error("from_vertices_2d: degenerate edge");
    normal /= norm;
    p.W.row(i) = normal.transpose();
    p.u[i] = -normal.dot(a);
  }
  return p;
}

std::vector<Eigen::VectorXd> enumerate_vertices(const Polytope& p,
                                                double tol) {
  const int n = p.dim();
  const int K = p.facets();
  std::vector<Eigen::VectorXd> verts;
  std::vector<int> pick(static_cast<size_t>(n));
  auto rec = [&](auto&& self, int start, int depth) -> void {
    if (depth == n) {
      Eigen::MatrixXd A(n, n);
      Eigen::VectorXd rhs(n);
      for (int i = 0; i < n; ++i) {
        A.row(i) = p.W.row(pick[size_t(i)]);
        rhs[i] = -p.u[pick[size_t(i)]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
      if (!lu.isInvertible()) return;
      Eigen::VectorXd x = lu.solve(rhs);
      if (!p.contains(x, tol)) return;
      for (const auto& v : verts)
        if ((v - x).cwiseAbs().maxCoeff() < 1e-7) return;
      verts.push_back(x);
      return;
    }
    for (int i = start; i < K; ++i) {
      pick[size_t(depth)] = i;
      self(self, i + 1, depth + 1);
    }
  };
  rec(rec, 0, 0);
  return verts;
}

bool SubPolytope::contains(const Eigen::VectorXd& x, double tol) const {
  return ((H * x + g).array() >= -tol).all();
}

std::vector<Eigen::VectorXd> SubPolytope::facet_vertices(int j,
                                                         double tol) const {
  std::vector<Eigen::VectorXd> out;
  for (const auto& v : vertices)
    if (std::abs(H.row(j).dot(v) + g[j]) < tol) out.push_back(v);
  return out;
}

int DDecomposition::region_of(const Eigen::VectorXd& x) const {
  int best = -1;
  double best_slack = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < regions(); ++i) {
    double slack = (parts[size_t(i)].H * x + parts[size_t(i)].g).minCoeff();
    if (slack > best_slack) {
      best_slack = slack;
      best = i;
    }
  }
  return best;
}

namespace {

std::vector<Eigen::VectorXd> sub_vertices(const SubPolytope& s, double tol) {
  Polytope p;
  p.W = s.H;
  p.u = s.g;
  return enumerate_vertices(p, tol);
}

bool same_vertex_set(const std::vector<Eigen::VectorXd>& a,
                     const std::vector<Eigen::VectorXd>& b, double tol) {
  if (a.empty() || a.size() != b.size()) return false;
  for (const auto& va : a) {
    bool found = false;
    for (const auto& vb : b)
      if ((va - vb).cwiseAbs().maxCoeff() < tol) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

void detect_shared_facets(DDecomposition& dec) {
  const double tol = 1e-9;
  for (int i = 0; i < dec.regions(); ++i) {
    for (int j = i + 1; j < dec.regions(); ++j) {
      for (int k = 0; k < dec.parts[size_t(i)].facets(); ++k) {
        auto vk = dec.parts[size_t(i)].facet_vertices(k);
        if (int(vk.size()) < dec.parts[size_t(i)].dim()) continue;
        for (int l = 0; l < dec.parts[size_t(j)].facets(); ++l) {
          auto vl = dec.parts[size_t(j)].facet_vertices(l);
          if (same_vertex_set(vk, vl, tol))
            dec.shared_facets.push_back({i, k, j, l});
        }
      }
    }
  }
}

}  // namespace

DDecomposition d_decompose(const Polytope& p) {
  const int n = p.dim();
  const double tol = 1e-9;
  for (int i = 0; i < p.facets(); ++i)
    if (p.u[i] < -tol) throw Error("d_decompose: origin outside the polytope");

  auto verts = enumerate_vertices(p);
  if (verts.empty()) throw Error("d_decompose: polytope appears unbounded");

  DDecomposition dec;
  for (int i = 0; i < p.facets(); ++i) {
    // vertices on facet i
    std::vector<Eigen::VectorXd> fv;
    for (const auto& v : verts)
      if (std::abs(p.W.row(i).dot(v) + p.u[i]) < 1e-7) fv.push_back(v);
    if (int(fv.size()) < n) continue;  // degenerate facet
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (const auto& v : fv) centroid += v;
    centroid /= double(fv.size());

    std::vector<Eigen::VectorXd> rows;
    std::vector<double> offs;
    rows.emplace_back(p.W.row(i).transpose());
    offs.push_back(p.u[i]);
    // ridge planes through the origin, one per adjacent facet
    for (int j = 0; j < p.facets(); ++j) {
      if (j == i) continue;
      int shared = 0;
      for (const auto& v : fv)
        if (std::abs(p.W.row(j).dot(v) + p.u[j]) < 1e-7) ++shared;
      if (shared < n - 1) continue;
      Eigen::VectorXd h =
          p.u[j] * p.W.row(i).transpose() - p.u[i] * p.W.row(j).transpose();
      double scale = h.cwiseAbs().maxCoeff();
      if (scale < 1e-12) continue;
      h /= scale;
      if (h.dot(centroid) < 0) h = -h;
      rows.push_back(h);
      offs.push_back(0.0);
    }
    SubPolytope s;
    s.H.resize(int(rows.size()), n);
    s.g.resize(int(rows.size()));
    for (int r = 0; r < int(rows.size()); ++r) {
      s.H.row(r) = rows[size_t(r)].transpose();
      s.g[r] = offs[size_t(r)];
    }
    s.vertices = sub_vertices(s, tol);
    dec.parts.push_back(std::move(s));
  }
  detect_shared_facets(dec);
  return dec;
}

DDecomposition d_decompose_box_quadrants(const std::vector<double>& radii) {
  const int n = int(radii.size());
  DDecomposition dec;
  for (long long mask = 0; mask < (1LL << n); ++mask) {
    SubPolytope s;
    s.H.resize(2 * n, n);
    s.g.resize(2 * n);
    s.H.setZero();
    for (int i = 0; i < n; ++i) {
      double sign = (mask >> i) & 1 ? -1.0 : 1.0;
      // sign * x_i >= 0 and r_i - sign * x_i >= 0
      s.H(i, i) = sign;
      s.g[i] = 0.0;
      s.H(n + i, i) = -sign;
      s.g[n + i] = radii[size_t(i)];
    }
    s.vertices = sub_vertices(s, 1e-9);
    dec.parts.push_back(std::move(s));
  }
  detect_shared_facets(dec);
  return dec;
}

DDecomposition d_decompose_explicit(std::vector<SubPolytope> parts) {
  DDecomposition dec;
  dec.parts = std::move(parts);
  for (auto& s : dec.parts)
    if (s.vertices.empty()) s.vertices = sub_vertices(s, 1e-9);
  detect_shared_facets(dec);
  return dec;
}

std::vector<Exponent> enumerate_basis(int K, int d) {
  return exponents_up_to(K, d);
}

ScalarPoly expand_basis_element(const SubPolytope& part,
                                const Exponent& alpha) {
  const int n = part.dim();
  ScalarPoly poly;
  poly[Exponent(size_t(n), 0)] = 1.0;
  for (int j = 0; j < part.facets(); ++j) {
    for (int rep = 0; rep < alpha[size_t(j)]; ++rep) {
      ScalarPoly next;
      for (const auto& [e, c] : poly) {
        // multiply by (h_j . x + g_j)
        if (part.g[j] != 0.0) next[e] += c * part.g[j];
        for (int v = 0; v < n; ++v) {
          double hv = part.H(j, v);
          if (hv == 0.0) continue;
          Exponent e2 = e;
          e2[size_t(v)] += 1;
          next[e2] += c * hv;
        }
      }
      poly.swap(next);
    }
  }
  return poly;
}

HandelmanMaps build_maps(const SubPolytope& part, int d) {
  HandelmanMaps maps;
  maps.basis = enumerate_basis(part.facets(), d);
  maps.monomials = exponents_up_to(part.dim(), d);
  std::map<Exponent, int, LexBefore> row_of;
  for (int r = 0; r < int(maps.monomials.size()); ++r)
    row_of[maps.monomials[size_t(r)]] = r;

  const int n = part.dim();
  const int cols = int(maps.basis.size());
  maps.F = Eigen::MatrixXd::Zero(int(maps.monomials.size()), cols);
  maps.Hsq = Eigen::MatrixXd::Zero(n, cols);
  maps.J.assign(size_t(part.facets()),
                Eigen::MatrixXd::Zero(int(maps.monomials.size()), cols));

  for (int c = 0; c < cols; ++c) {
    ScalarPoly poly = expand_basis_element(part, maps.basis[size_t(c)]);
    for (const auto& [e, v] : poly) {
      maps.F(row_of.at(e), c) = v;
      for (int q = 0; q < n; ++q) {
        Exponent sq(size_t(n), 0);
        sq[size_t(q)] = 2;
        if (e == sq) maps.Hsq(q, c) = v;
      }
    }
    for (int k = 0; k < part.facets(); ++k) {
      if (maps.basis[size_t(c)][size_t(k)] != 0) continue;
      for (const auto& [e, v] : poly) maps.J[size_t(k)](row_of.at(e), c) = v;
    }
  }

  for (int c = 0; c < cols; ++c) {
    bool in_s = true;
    for (int j = 0; j < part.facets(); ++j)
      if (std::abs(part.g[j]) <= 1e-12 && maps.basis[size_t(c)][size_t(j)] != 0)
        in_s = false;
    if (in_s) maps.r_members.push_back(c);
  }
  maps.R = Eigen::MatrixXd::Zero(int(maps.r_members.size()), cols);
  for (int r = 0; r < int(maps.r_members.size()); ++r)
    maps.R(r, maps.r_members[size_t(r)]) = 1.0;
  return maps;
}

GradientMap build_gradient_map(const SubPolytope& part, int d,
                               const std::vector<MatrixPolynomial>& field) {
  const int n = part.dim();
  if (int(field.size()) != n)
    throw Error("build_gradient_map: field dimension mismatch");
  int df = 0;
  for (const auto& f : field) df = std::max(df, f.total_degree());
  GradientMap gm;
  gm.monomials = exponents_up_to(n, d + df - 1);
  std::map<Exponent, int, LexBefore> row_of;
  for (int r = 0; r < int(gm.monomials.size()); ++r)
    row_of[gm.monomials[size_t(r)]] = r;
  auto basis = enumerate_basis(part.facets(), d);
  gm.G = Eigen::MatrixXd::Zero(int(gm.monomials.size()), int(basis.size()));
  for (int c = 0; c < int(basis.size()); ++c) {
    ScalarPoly poly = expand_basis_element(part, basis[size_t(c)]);
    // <grad rho, f> = sum_v d(rho)/dx_v * f_v
    for (const auto& [e, coeff] : poly) {
      for (int v = 0; v < n; ++v) {
        if (e[size_t(v)] == 0) continue;
        Exponent de = e;
        de[size_t(v)] -= 1;
        double dcoeff = coeff * double(e[size_t(v)]);
        for (const auto& [fe, fc] : field[size_t(v)].terms()) {
          Exponent prod(static_cast<size_t>(n));
          for (int q = 0; q < n; ++q)
            prod[size_t(q)] = de[size_t(q)] + fe[size_t(q)];
          gm.G(row_of.at(prod), c) += dcoeff * fc(0, 0);
        }
      }
    }
  }
  return gm;
}

double HandelmanCertificate::value_region(const DDecomposition& dec,
                                          int region,
                                          const Eigen::VectorXd& x) const {
  const SubPolytope& part = dec.parts[size_t(region)];
  auto basis = enumerate_basis(part.facets(), d);
  double acc = 0.0;
  Eigen::VectorXd slack = part.H * x + part.g;
  for (int c = 0; c < int(basis.size()); ++c) {
    double term = b[size_t(region)][c];
    if (term == 0.0) continue;
    for (int j = 0; j < part.facets(); ++j)
      for (int rep = 0; rep < basis[size_t(c)][size_t(j)]; ++rep)
        term *= slack[j];
    acc += term;
  }
  return acc;
}

double HandelmanCertificate::value(const DDecomposition& dec,
                                   const Eigen::VectorXd& x) const {
  return value_region(dec, dec.region_of(x), x);
}

Eigen::VectorXd HandelmanLp::expand_b(int region,
                                      const Eigen::VectorXd& x) const {
  Eigen::VectorXd full =
      Eigen::VectorXd::Zero(b_full_size[size_t(region)]);
  for (int c = 0; c < b_size[size_t(region)]; ++c)
    full[b_keep[size_t(region)][size_t(c)]] =
        x[b_offset[size_t(region)] + c];
  return full;
}

namespace {

// Drops identically-zero rows (their rhs must vanish) and linearly
// dependent rows; redundant continuity rows around region cycles would
// otherwise make the Schur complement singular.
void presolve_lp(LpStandardForm* lp) {
  const int rows = int(lp->b.size());
  const int cols = lp->num_vars;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (const auto& [r, v] : lp->columns[size_t(j)]) A(r, j) = v;
  std::vector<char> keep(static_cast<size_t>(rows), 0);
  std::vector<int> nonzero;
  for (int r = 0; r < rows; ++r) {
    if (A.row(r).cwiseAbs().maxCoeff() > 0.0)
      nonzero.push_back(r);
    else if (std::abs(lp->b[r]) > 1e-12)
      throw Error("assemble_lp: inconsistent zero row");
  }
  Eigen::MatrixXd At(cols, int(nonzero.size()));
  for (int i = 0; i < int(nonzero.size()); ++i)
    At.col(i) = A.row(nonzero[size_t(i)]).transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(At);
  qr.setThreshold(1e-10);
  int rank = int(qr.rank());
  for (int i = 0; i < rank; ++i)
    keep[size_t(nonzero[size_t(qr.colsPermutation().indices()[i])])] = 1;
  // remap rows and equilibrate each kept row to unit max coefficient
  // (solution-invariant, keeps the interior-point iterates well scaled)
  std::vector<int> new_row(static_cast<size_t>(rows), -1);
  std::vector<double> row_scale(static_cast<size_t>(rows), 1.0);
  int nr = 0;
  for (int r = 0; r < rows; ++r)
    if (keep[size_t(r)]) {
      new_row[size_t(r)] = nr++;
      double m = A.row(r).cwiseAbs().maxCoeff();
      row_scale[size_t(r)] = 1.0 / m;
    }
  Eigen::VectorXd nb(nr);
  for (int r = 0; r < rows; ++r)
    if (keep[size_t(r)])
      nb[new_row[size_t(r)]] = lp->b[r] * row_scale[size_t(r)];
  for (auto& col : lp->columns) {
    std::vector<std::pair<int, double>> filtered;
    for (const auto& [r, v] : col)
      if (keep[size_t(r)])
        filtered.emplace_back(new_row[size_t(r)], v * row_scale[size_t(r)]);
    col = std::move(filtered);
  }
  lp->b = nb;
}

}  // namespace

HandelmanLp assemble_lp(const DDecomposition& dec,
                        const std::vector<MatrixPolynomial>& field, int d,
                        double gamma_cap) {
  if (d < 2) throw Error("assemble_lp: degree must be at least 2");
  const int L = dec.regions();
  const int n = dec.parts.empty() ? 0 : dec.parts[0].dim();
  int df = 0;
  for (const auto& f : field) df = std::max(df, f.total_degree());

  HandelmanLp out;
  out.regions = L;
  out.d = d;
  out.df = df;

  std::vector<HandelmanMaps> maps_b, maps_c;
  std::vector<GradientMap> grads;
  for (int i = 0; i < L; ++i) {
    maps_b.push_back(build_maps(dec.parts[size_t(i)], d));
    maps_c.push_back(build_maps(dec.parts[size_t(i)], d + df - 1));
    grads.push_back(build_gradient_map(dec.parts[size_t(i)], d, field));
  }

  // variable layout: shifted gamma, then per region b_i, then c'_i = -c_i,
  // then slack blocks appended as rows require; gamma = g - cap keeps the
  // objective variable nonnegative and boxed (the LP is unbounded in gamma
  // for contractive fields, and a free split leaves a recession ray)
  int nv = 0;
  out.gamma_var = nv++;
  out.gamma_shift = gamma_cap;
  for (int i = 0; i < L; ++i) {
    const auto& mb = maps_b[size_t(i)];
    std::vector<int> keep;
    std::vector<char> pinned(mb.basis.size(), 0);
    for (int r : mb.r_members) pinned[size_t(r)] = 1;
    for (int c = 0; c < int(mb.basis.size()); ++c)
      if (!pinned[size_t(c)]) keep.push_back(c);
    out.b_offset.push_back(nv);
    out.b_size.push_back(int(keep.size()));
    out.b_full_size.push_back(int(mb.basis.size()));
    out.b_keep.push_back(std::move(keep));
    nv += out.b_size.back();
  }
  for (int i = 0; i < L; ++i) {
    out.c_offset.push_back(nv);
    out.c_size.push_back(int(maps_c[size_t(i)].basis.size()));
    nv += out.c_size.back();
  }

  struct RowBuilder {
    std::vector<std::vector<std::pair<int, double>>> cols;
    std::vector<double> rhs;
    int rows = 0;
    void ensure(int nv) { cols.resize(size_t(nv)); }
    int add_row(double b) {
      rhs.push_back(b);
      return rows++;
    }
    void set(int row, int col, double v) {
      if (v != 0.0) cols[size_t(col)].emplace_back(row, v);
    }
  } rb;

  // rows first over structural vars; slacks appended after
  std::vector<std::pair<int, double>> slack_entries;  // (row, coeff)

  auto add_slack_rowcoeff = [&](int row, double coeff) {
    slack_entries.emplace_back(row, coeff);
  };

  rb.ensure(nv);
  for (int i = 0; i < L; ++i) {
    const auto& mb = maps_b[size_t(i)];
    const auto& mc = maps_c[size_t(i)];
    const auto& keep = out.b_keep[size_t(i)];
    // R_i(b_i, d) = 0 holds structurally: the pinned entries have no
    // column, so every feasible point satisfies the map exactly
    // H_i(b_i, d) - s = 1
    for (int q = 0; q < n; ++q) {
      int row = rb.add_row(1.0);
      for (int c = 0; c < out.b_size[size_t(i)]; ++c)
        rb.set(row, out.b_offset[size_t(i)] + c,
               mb.Hsq(q, keep[size_t(c)]));
      add_slack_rowcoeff(row, -1.0);
    }
    // H_i(c_i, d+df-1) <= -gamma: with c = -c' and gamma = g - cap this
    // reads H c' - g - s = -cap
    for (int q = 0; q < n; ++q) {
      int row = rb.add_row(-gamma_cap);
      for (int c = 0; c < out.c_size[size_t(i)]; ++c)
        rb.set(row, out.c_offset[size_t(i)] + c, mc.Hsq(q, c));
      rb.set(row, out.gamma_var, -1.0);
      add_slack_rowcoeff(row, -1.0);
    }
    // G_i(b_i, d) = F_i(c_i, d+df-1)  <=>  G b + F c' = 0
    for (int r = 0; r < int(grads[size_t(i)].monomials.size()); ++r) {
      int row = rb.add_row(0.0);
      for (int c = 0; c < out.b_size[size_t(i)]; ++c)
        rb.set(row, out.b_offset[size_t(i)] + c,
               grads[size_t(i)].G(r, keep[size_t(c)]));
      for (int c = 0; c < out.c_size[size_t(i)]; ++c)
        rb.set(row, out.c_offset[size_t(i)] + c, mc.F(r, c));
    }
  }
  // continuity J_i(b_i,d,k) = J_j(b_j,d,l)
  for (const auto& m : dec.shared_facets) {
    const auto& mi = maps_b[size_t(m.region_i)];
    const auto& mj = maps_b[size_t(m.region_j)];
    const auto& keep_i = out.b_keep[size_t(m.region_i)];
    const auto& keep_j = out.b_keep[size_t(m.region_j)];
    for (int r = 0; r < int(mi.monomials.size()); ++r) {
      int row = rb.add_row(0.0);
      for (int c = 0; c < out.b_size[size_t(m.region_i)]; ++c)
        rb.set(row, out.b_offset[size_t(m.region_i)] + c,
               mi.J[size_t(m.facet_k)](r, keep_i[size_t(c)]));
      for (int c = 0; c < out.b_size[size_t(m.region_j)]; ++c)
        rb.set(row, out.b_offset[size_t(m.region_j)] + c,
               -mj.J[size_t(m.facet_l)](r, keep_j[size_t(c)]));
      (void)row;
    }
  }
  // box the shifted objective variable: g + s = 2 cap, i.e. gamma <= cap
  {
    int row = rb.add_row(2.0 * gamma_cap);
    rb.set(row, out.gamma_var, 1.0);
    add_slack_rowcoeff(row, 1.0);
  }

  // append slacks
  int total_vars = nv + int(slack_entries.size());
  rb.ensure(total_vars);
  for (int s = 0; s < int(slack_entries.size()); ++s)
    rb.cols[size_t(nv + s)].emplace_back(slack_entries[size_t(s)].first,
                                         slack_entries[size_t(s)].second);

  out.lp.num_vars = total_vars;
  out.lp.columns = std::move(rb.cols);
  out.lp.b = Eigen::Map<Eigen::VectorXd>(rb.rhs.data(), long(rb.rhs.size()));
  out.lp.c = Eigen::VectorXd::Zero(total_vars);
  out.lp.c[out.gamma_var] = 1.0;
  presolve_lp(&out.lp);

  // complexity-model counts (variables net of R-pinned entries;
  // constraints add continuity and gradient-matching rows)
  long long vars = 0, cons = 0;
  for (int i = 0; i < L; ++i)
    vars += out.b_size[size_t(i)] + out.c_size[size_t(i)] -
            long(maps_b[size_t(i)].r_members.size());
  cons = vars;
  for (const auto& m : dec.shared_facets)
    cons += long(maps_b[size_t(m.region_i)].monomials.size());
  for (int i = 0; i < L; ++i)
    cons += long(grads[size_t(i)].monomials.size());
  out.model_vars = vars;
  out.model_cons = cons;
  return out;
}

LyapunovSearchResult find_lyapunov(const DDecomposition& dec,
                                   const std::vector<MatrixPolynomial>& field,
                                   int d_max, SolverOptions opts,
                                   double gamma_tol) {
  LyapunovSearchResult res;
  for (int d = 2; d <= d_max; ++d) {
    HandelmanLp hlp = assemble_lp(dec, field, d);
    LpResult lr = solve_lp(hlp.lp, opts);
    res.last_status = lr.status;
    res.last_d = d;
    double gamma = lr.objective - hlp.gamma_shift;
    if (lr.status == SolveStatus::Optimal) res.last_gamma = gamma;
    if (lr.status == SolveStatus::Optimal && gamma > gamma_tol) {
      res.feasible = true;
      res.certificate.d = d;
      res.certificate.gamma = gamma;
      for (int i = 0; i < hlp.regions; ++i) {
        res.certificate.b.push_back(hlp.expand_b(i, lr.x));
        res.certificate.c.push_back(
            -lr.x.segment(hlp.c_offset[size_t(i)], hlp.c_size[size_t(i)]));
      }
      return res;
    }
  }
  return res;
}

double largest_inscribed_sublevel(const HandelmanCertificate& cert,
                                  const DDecomposition& dec,
                                  const Polytope& gamma_set,
                                  int samples_per_facet) {
  if (gamma_set.dim() != 2)
    throw Error("largest_inscribed_sublevel: 2-D polytopes only");
  auto verts = enumerate_vertices(gamma_set);
  double best = std::numeric_limits<double>::infinity();
  for (int f = 0; f < gamma_set.facets(); ++f) {
    // facet endpoints
    std::vector<Eigen::VectorXd> fv;
    for (const auto& v : verts)
      if (std::abs(gamma_set.W.row(f).dot(v) + gamma_set.u[f]) < 1e-7)
        fv.push_back(v);
    if (fv.size() != 2) continue;
    auto eval_at = [&](double t) {
      Eigen::VectorXd x = (1.0 - t) * fv[0] + t * fv[1];
      return cert.value(dec, x);
    };
    double best_t = 0.0, best_v = std::numeric_limits<double>::infinity();
    for (int s = 0; s <= samples_per_facet; ++s) {
      double t = double(s) / samples_per_facet;
      double v = eval_at(t);
      if (v < best_v) {
        best_v = v;
        best_t = t;
      }
    }
    // golden-section refinement around the best sample
    double lo = std::max(0.0, best_t - 1.0 / samples_per_facet);
    double hi = std::min(1.0, best_t + 1.0 / samples_per_facet);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = eval_at(x1), f2 = eval_at(x2);
    for (int it = 0; it < 60; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = eval_at(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = eval_at(x2);
      }
    }
    best = std::min(best, std::min(f1, f2));
    best = std::min(best, best_v);
  }
  return best;
}

std::vector<Eigen::Vector2d> level_set_polyline(
    const HandelmanCertificate& cert, const DDecomposition& dec, double level,
    int rays) {
  std::vector<Eigen::Vector2d> pts;
  for (int r = 0; r <= rays; ++r) {
    double theta = 2.0 * M_PI * double(r % rays) / rays;
    Eigen::Vector2d dir(std::cos(theta), std::sin(theta));
    // bisection on the ray: V(0)=0 <= level, find crossing
    double lo = 0.0, hi = 1e-3;
    auto value = [&](double t) {
      Eigen::VectorXd x = t * dir;
      return cert.value(dec, x);
    };
    int guard = 0;
    while (value(hi) < level && guard++ < 60) hi *= 2.0;
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      (value(mid) < level ? lo : hi) = mid;
    }
    pts.emplace_back(lo * dir);
  }
  return pts;
}

PolytopeMinResult min_poly_over_polytope(const MatrixPolynomial& f,
                                         const Polytope& gamma_set, int d_max,
                                         double eps, SolverOptions opts) {
  if (f.n() != 1)
    throw Error("min_poly_over_polytope: scalar polynomial expected");
  const int n = gamma_set.dim();
  if (f.num_vars() != n)
    throw Error("min_poly_over_polytope: dimension mismatch");
  const int df = f.total_degree();

  SubPolytope whole;
  whole.H = gamma_set.W;
  whole.g = gamma_set.u;

  PolytopeMinResult res;
  res.bound = -std::numeric_limits<double>::infinity();
  bool have_prev = false;
  for (int d = std::max(1, df); d <= d_max; ++d) {
    auto basis = enumerate_basis(gamma_set.facets(), d);
    auto monomials = exponents_up_to(n, d);
    std::map<Exponent, int, LexBefore> row_of;
    for (int r = 0; r < int(monomials.size()); ++r)
      row_of[monomials[size_t(r)]] = r;

    // rows: monomial matching of f(x) - gamma = sum c_a rho_a(x), with
    // gamma = g - shift so the objective variable stays nonnegative
    double shift = 1.0;
    for (const auto& [e, c] : f.terms()) shift += std::abs(c(0, 0));
    double scale = 1.0;
    for (const auto& v : enumerate_vertices(gamma_set))
      scale = std::max(scale, v.cwiseAbs().maxCoeff());
    shift *= std::pow(scale, df);

    LpStandardForm lp;
    int nv = 1;  // shifted gamma
    int c0 = nv;
    nv += int(basis.size());
    lp.num_vars = nv;
    lp.columns.assign(size_t(nv), {});
    lp.b = Eigen::VectorXd::Zero(int(monomials.size()));
    for (const auto& [e, c] : f.terms()) lp.b[row_of.at(e)] = c(0, 0);
    // gamma appears on the left: f - gamma => constant row gets +shift
    int const_row = row_of.at(Exponent(size_t(n), 0));
    lp.b[const_row] += shift;
    lp.columns[0].emplace_back(const_row, 1.0);
    for (int cidx = 0; cidx < int(basis.size()); ++cidx) {
      ScalarPoly poly = expand_basis_element(whole, basis[size_t(cidx)]);
      for (const auto& [e, v] : poly)
        if (v != 0.0)
          lp.columns[size_t(c0 + cidx)].emplace_back(row_of.at(e), v);
    }
    lp.c = Eigen::VectorXd::Zero(nv);
    lp.c[0] = 1.0;
    lp.var_scale = shift;
    presolve_lp(&lp);

    LpResult lr = solve_lp(lp, opts);
    if (lr.status == SolveStatus::Optimal) {
      double g = lr.objective - shift;
      res.bounds_by_degree.push_back(g);
      if (have_prev && std::abs(g - res.bound) < eps) {
        res.bound = std::max(res.bound, g);
        res.final_d = d;
        break;
      }
      res.bound = std::max(res.bound, g);
      res.final_d = d;
      have_prev = true;
    } else {
      res.bounds_by_degree.push_back(std::nan(""));
    }
  }
  return res;
}

}  // namespace polycert
