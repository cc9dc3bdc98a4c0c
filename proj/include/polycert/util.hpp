#ifndef POLYCERT_UTIL_HPP
#define POLYCERT_UTIL_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace polycert {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Solver could not factor the Schur complement matrix.
struct ConditioningError : Error {
  using Error::Error;
};

// Line search collapsed below the minimum step.
struct StallError : Error {
  using Error::Error;
};

// Checked-in data file missing or failed its checksum.
struct DataError : Error {
  using Error::Error;
};

std::string sha256_hex(const std::string& bytes);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Reads a data file and verifies it against data/MANIFEST.sha256.
std::string read_verified(const std::string& filename);
std::string data_path(const std::string& filename);

double log_factorial(int n);
// n! / (k_1! ... k_m!) with sum(k) == n; log-factorial path above n = 20.
double multinomial(int n, const std::vector<int>& parts);
double binomial(int n, int k);

}  // namespace polycert

#endif
