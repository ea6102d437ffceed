#include "fpp/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

#include "fpp/errors.hpp"

namespace fpp {

namespace {

int initial_workers() {
  if (const char* env = std::getenv("FPP_WORKERS"); env != nullptr && *env != '\0') {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return omp_get_max_threads();
}

int& workers() {
  static int n = initial_workers();
  return n;
}

}  // namespace

int worker_count() { return workers(); }

void set_worker_count(int n) {
  if (n < 1) fail(ErrorKind::invalid_input, "worker count must be positive");
  workers() = n;
}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::size_cap: return "size_cap";
    case ErrorKind::verification: return "verification_failure";
    case ErrorKind::claim_violation: return "claim_violation";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input: return 2;
    case ErrorKind::size_cap: return 3;
    case ErrorKind::verification: return 4;
    case ErrorKind::claim_violation: return 5;
  }
  return 1;
}

}  // namespace fpp
