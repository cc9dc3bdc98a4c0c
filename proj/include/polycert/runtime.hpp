#ifndef POLYCERT_RUNTIME_HPP
#define POLYCERT_RUNTIME_HPP

#include <functional>
#include <mutex>
#include <string>
#include <vector>

namespace polycert {

// Contiguous block ranges per worker; remainder goes to the first workers.
struct Partition {
  int workers = 1;
  // half-open [begin, end) ranges over 0..count
  std::vector<std::pair<int, int>> ranges;

  int owner_of(int block) const;
};

Partition partition(int L, int M, int N);
Partition partition_blocks(int count, int N);

struct PhaseRecord {
  std::string phase;
  int worker = 0;
  long long ops = 0;
  long long bytes = 0;
};

// Per-worker message units exchanged during SDP set-up: one unit per beta
// coefficient, n^2 units per H coefficient.
struct SetupStats {
  int workers = 1;
  std::vector<long long> beta_units;
  std::vector<long long> h_units;
  std::vector<PhaseRecord> phases;
  std::mutex mu;

  void ensure(int n);
  void add_beta(int worker, long long units);
  void add_h(int worker, long long units);
  void record(const PhaseRecord& rec);
  std::string timing_csv() const;
};

// Fork/join worker pool over contiguous block ranges. Workers write into
// per-block slots only, so results do not depend on the worker count.
class WorkerPool {
 public:
  explicit WorkerPool(int workers = 0);  // 0: POLYCERT_WORKERS or 1

  int workers() const { return workers_; }

  // Runs fn(block) for block in 0..count, partitioned contiguously.
  void run_blocks(int count, const std::function<void(int block)>& fn);
  // Variant exposing the worker index (for instrumentation).
  void run_ranges(
      int count,
      const std::function<void(int worker, int begin, int end)>& fn);

 private:
  int workers_ = 1;
};

// Boolean adjacency of the inter-processor communication graph.
struct CommGraph {
  std::vector<std::vector<uint8_t>> adj;

  int size() const { return int(adj.size()); }
  int out_degree(int i) const;
};

// Set-up pass graph: the owner of each degree-(dp+d1) monomial feeds the
// owners of the monomials of (sum alpha_i) * alpha^gamma one level up.
CommGraph setup_comm_graph(int l, int dp, int d1);
// Solver graph: star centered on the coordinator.
CommGraph solver_comm_graph(int N);

// Predicted speed-up SP_N = N / (D + N S) with the decentralized work of
// the Schur complement assembly against the coordinator's factorization.
double speedup_model(int n, int l, int dp, int da, int d1, int d2, int N);

}  // namespace polycert

#endif
