#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Dense two-phase primal simplex for the small linear programs that show up
// in allocation problems (tens of variables). Not meant for large sparse LPs.
namespace offload::lp {

enum class Sense { less_equal, equal, greater_equal };

struct Constraint {
  std::vector<double> coeffs;
  Sense sense = Sense::less_equal;
  double rhs = 0.0;
};

/// minimize objective . x  subject to constraints, x >= 0.
struct LinearProgram {
  std::size_t num_vars = 0;
  std::vector<double> objective;
  std::vector<Constraint> constraints;
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Options {
  double tolerance = 1e-12;
  std::size_t max_iterations = 200000;
  /// Consecutive non-improving pivots before switching to Bland's rule.
  std::size_t stall_limit = 50;
};

struct Result {
  Status status = Status::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::size_t iterations = 0;
};

Result minimize(const LinearProgram& lp, const Options& options = {});

const char* to_string(Status s);

/// Row-major dense matrix view used by min_max_over_simplex.
struct MatrixView {
  std::span<const double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct MinMaxResult {
  std::vector<double> x;
  double value = 0.0;
  /// An allowed column was entirely zero and absorbed the whole total.
  bool free_column = false;
  std::size_t iterations = 0;
};

/// Solves  min_x max_r (A x)_r  s.t.  sum_k x_k = total, x >= 0, and
/// x_k = 0 where !allowed[k]. Entries of A must be nonnegative. The
/// returned value is max_r (A x)_r re-evaluated at the returned x.
MinMaxResult min_max_over_simplex(const MatrixView& a, const std::vector<bool>& allowed,
                                  double total, const Options& options = {});

}  // namespace offload::lp
