#include "polycert/runtime.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "polycert/exponent.hpp"
#include "polycert/util.hpp"

namespace polycert {

int Partition::owner_of(int block) const {
  for (int w = 0; w < int(ranges.size()); ++w)
    if (block >= ranges[w].first && block < ranges[w].second) return w;
  return -1;
}

Partition partition_blocks(int count, int N) {
  if (N < 1) throw Error("partition: worker count must be >= 1");
  Partition p;
  p.workers = N;
  int base = count / N;
  int r = count % N;
  int begin = 0;
  for (int w = 0; w < N; ++w) {
    int len = base + (w < r ? 1 : 0);
    p.ranges.emplace_back(begin, begin + len);
    begin += len;
  }
  return p;
}

Partition partition(int L, int M, int N) { return partition_blocks(L + M, N); }

void SetupStats::ensure(int n) {
  std::lock_guard<std::mutex> lock(mu);
  if (int(beta_units.size()) < n) {
    beta_units.resize(n, 0);
    h_units.resize(n, 0);
    workers = n;
  }
}

void SetupStats::add_beta(int worker, long long units) {
  std::lock_guard<std::mutex> lock(mu);
  beta_units[worker] += units;
}

void SetupStats::add_h(int worker, long long units) {
  std::lock_guard<std::mutex> lock(mu);
  h_units[worker] += units;
}

void SetupStats::record(const PhaseRecord& rec) {
  std::lock_guard<std::mutex> lock(mu);
  phases.push_back(rec);
}

std::string SetupStats::timing_csv() const {
  std::ostringstream out;
  out << "phase,worker,ops,bytes\n";
  for (const auto& rec : phases)
    out << rec.phase << "," << rec.worker << "," << rec.ops << "," << rec.bytes
        << "\n";
  return out.str();
}

WorkerPool::WorkerPool(int workers) : workers_(workers) {
  if (workers_ <= 0) {
    const char* env = std::getenv("POLYCERT_WORKERS");
    workers_ = env ? std::atoi(env) : 1;
    if (workers_ <= 0) workers_ = 1;
  }
}

void WorkerPool::run_ranges(
    int count, const std::function<void(int worker, int begin, int end)>& fn) {
  if (count <= 0) return;
  int n = std::min(workers_, count);
  Partition p = partition_blocks(count, n);
  if (n == 1) {
    fn(0, 0, count);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (int w = 0; w < n; ++w) {
    auto [b, e] = p.ranges[w];
    threads.emplace_back([&fn, w, b, e] { fn(w, b, e); });
  }
  for (auto& t : threads) t.join();
}

void WorkerPool::run_blocks(int count, const std::function<void(int)>& fn) {
  run_ranges(count, [&fn](int, int begin, int end) {
    for (int j = begin; j < end; ++j) fn(j);
  });
}

int CommGraph::out_degree(int i) const {
  int d = 0;
  for (uint8_t v : adj[i]) d += v;
  return d;
}

CommGraph setup_comm_graph(int l, int dp, int d1) {
  long long r_cur = monomial_count(l, dp + d1);
  long long r_next = monomial_count(l, dp + d1 + 1);
  CommGraph g;
  g.adj.assign(size_t(r_next), std::vector<uint8_t>(size_t(r_next), 0));
  if (r_cur <= 1) return g;  // single owner: nothing to exchange
  ExponentSet cur(l, dp + d1);
  for (int i = 0; i < cur.size(); ++i) {
    const Exponent& gamma = cur[i];
    for (int v = 0; v < l; ++v) {
      Exponent up = gamma;
      up[v] += 1;
      long long j = lex_index(up, dp + d1 + 1);
      if (j - 1 != i) g.adj[size_t(i)][size_t(j - 1)] = 1;
    }
  }
  return g;
}

CommGraph solver_comm_graph(int N) {
  CommGraph g;
  g.adj.assign(size_t(N), std::vector<uint8_t>(size_t(N), 0));
  for (int i = 1; i < N; ++i) {
    g.adj[0][size_t(i)] = 1;
    g.adj[size_t(i)][0] = 1;
  }
  return g;
}

double speedup_model(int n, int l, int dp, int da, int d1, int d2, int N) {
  if (N <= 1) return 1.0;
  double L = double(monomial_count(l, dp + d1));
  double M = double(monomial_count(l, dp + da + d2));
  double blocks = L + M;
  double Neff = std::min(double(N), blocks);
  double kappa = double(monomial_count(l, dp));
  double K = 0.5 * double(n) * double(n + 1) * kappa;
  double per_core_blocks =
      Neff < blocks ? std::floor(blocks / Neff) : 1.0;
  double decentralized =
      Neff * per_core_blocks * K * K * double(n) * double(n) * double(n);
  double root = K * K * K;
  double D = decentralized / (decentralized + root);
  double S = root / (decentralized + root);
  return Neff / (D + Neff * S);
}

}  // namespace polycert
