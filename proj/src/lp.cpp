#include "offload/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "offload/errors.hpp"

namespace offload::lp {

const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration limit";
  }
  return "unknown";
}

namespace {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), t_(rows * (cols + 1), 0.0), cost_(cols + 1, 0.0),
        basis_(rows, 0) {}

  double& at(std::size_t r, std::size_t c) { return t_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  double rhs(std::size_t r) const { return at(r, cols_); }
  std::vector<double>& cost() { return cost_; }
  std::vector<std::size_t>& basis() { return basis_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double inv = 1.0 / at(pr, pc);
    for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
    const double f = cost_[pc];
    if (f != 0.0) {
      for (std::size_t c = 0; c <= cols_; ++c) cost_[c] -= f * at(pr, c);
      cost_[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

  /// Rebuilds the reduced-cost row for objective c (size cols) and the current basis.
  void price(const std::vector<double>& c) {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    std::copy(c.begin(), c.end(), cost_.begin());
    for (std::size_t r = 0; r < rows_; ++r) {
      const double cb = c[basis_[r]];
      if (cb == 0.0) continue;
      for (std::size_t col = 0; col <= cols_; ++col) cost_[col] -= cb * at(r, col);
    }
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> t_;
  std::vector<double> cost_;  // reduced costs; last entry is -objective
  std::vector<std::size_t> basis_;
};

// Runs primal simplex on the tableau over columns [0, usable). Dantzig's rule
// until the objective stalls, then Bland's rule, which cannot cycle.
Status run(Tableau& tab, std::size_t usable, const Options& opt, std::size_t& iterations) {
  const double tol = opt.tolerance;
  std::size_t stall = 0;
  double last_obj = std::numeric_limits<double>::infinity();
  while (iterations < opt.max_iterations) {
    const bool bland = stall >= opt.stall_limit;
    std::size_t enter = usable;
    double best = -tol;
    for (std::size_t c = 0; c < usable; ++c) {
      const double rc = tab.cost()[c];
      if (rc < best) {
        enter = c;
        if (bland) break;
        best = rc;
      }
    }
    if (enter == usable) return Status::optimal;

    std::size_t leave = tab.rows();
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < tab.rows(); ++r) {
      const double a = tab.at(r, enter);
      if (a <= tol) continue;
      const double ratio = std::max(tab.rhs(r), 0.0) / a;
      if (leave == tab.rows()) {
        best_ratio = ratio;
        leave = r;
        continue;
      }
      const double slack = tol * std::max(1.0, best_ratio);
      if (ratio < best_ratio - slack ||
          (ratio <= best_ratio + slack && tab.basis()[r] < tab.basis()[leave])) {
        best_ratio = ratio;
        leave = r;
      }
    }
    if (leave == tab.rows()) return Status::unbounded;

    tab.pivot(leave, enter);
    ++iterations;
    const double obj = -tab.cost().back();
    if (obj < last_obj - tol * std::max(1.0, std::abs(last_obj))) {
      stall = 0;
      last_obj = obj;
    } else {
      ++stall;
    }
  }
  return Status::iteration_limit;
}

}  // namespace

Result minimize(const LinearProgram& lp, const Options& opt) {
  const std::size_t n = lp.num_vars;
  if (lp.objective.size() != n) throw ContractError("lp: objective size mismatch");
  const std::size_t m = lp.constraints.size();

  // Normalize every row to rhs >= 0 and count the extra columns.
  std::vector<Constraint> rows = lp.constraints;
  std::size_t n_slack = 0;
  std::size_t n_art = 0;
  for (auto& row : rows) {
    if (row.coeffs.size() != n) throw ContractError("lp: constraint size mismatch");
    if (row.rhs < 0.0) {
      for (double& v : row.coeffs) v = -v;
      row.rhs = -row.rhs;
      if (row.sense == Sense::less_equal) {
        row.sense = Sense::greater_equal;
      } else if (row.sense == Sense::greater_equal) {
        row.sense = Sense::less_equal;
      }
    }
    if (row.sense != Sense::equal) ++n_slack;
    if (row.sense != Sense::less_equal) ++n_art;
  }

  const std::size_t cols = n + n_slack + n_art;
  const std::size_t art_begin = n + n_slack;
  Tableau tab(m, cols);
  std::size_t slack = n;
  std::size_t art = art_begin;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) tab.at(r, c) = rows[r].coeffs[c];
    tab.rhs(r) = rows[r].rhs;
    switch (rows[r].sense) {
      case Sense::less_equal:
        tab.at(r, slack) = 1.0;
        tab.basis()[r] = slack++;
        break;
      case Sense::greater_equal:
        tab.at(r, slack++) = -1.0;
        tab.at(r, art) = 1.0;
        tab.basis()[r] = art++;
        break;
      case Sense::equal:
        tab.at(r, art) = 1.0;
        tab.basis()[r] = art++;
        break;
    }
  }

  Result res;
  if (n_art > 0) {
    std::vector<double> phase1(cols, 0.0);
    for (std::size_t c = art_begin; c < cols; ++c) phase1[c] = 1.0;
    tab.price(phase1);
    const Status s = run(tab, cols, opt, res.iterations);
    if (s == Status::iteration_limit) {
      res.status = s;
      return res;
    }
    double scale = 1.0;
    for (const auto& row : rows) scale = std::max(scale, row.rhs);
    if (-tab.cost().back() > 1e-9 * scale) {
      res.status = Status::infeasible;
      return res;
    }
    // Drive zero-valued artificials out of the basis where possible.
    for (std::size_t r = 0; r < m; ++r) {
      if (tab.basis()[r] < art_begin) continue;
      std::size_t best = art_begin;
      double mag = opt.tolerance;
      for (std::size_t c = 0; c < art_begin; ++c) {
        if (std::abs(tab.at(r, c)) > mag) {
          mag = std::abs(tab.at(r, c));
          best = c;
        }
      }
      if (best < art_begin) tab.pivot(r, best);
    }
  }

  std::vector<double> phase2(cols, 0.0);
  std::copy(lp.objective.begin(), lp.objective.end(), phase2.begin());
  tab.price(phase2);
  res.status = run(tab, art_begin, opt, res.iterations);
  if (res.status != Status::optimal) return res;

  res.x.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    if (tab.basis()[r] < n) res.x[tab.basis()[r]] = std::max(tab.rhs(r), 0.0);
  }
  res.objective = 0.0;
  for (std::size_t c = 0; c < n; ++c) res.objective += lp.objective[c] * res.x[c];
  return res;
}

MinMaxResult min_max_over_simplex(const MatrixView& a, const std::vector<bool>& allowed,
                                  double total, const Options& options) {
  if (allowed.size() != a.cols) throw ContractError("min_max: mask size mismatch");
  if (!(total >= 0.0)) throw ParameterError("min_max: total must be >= 0");

  MinMaxResult out;
  out.x.assign(a.cols, 0.0);
  if (total == 0.0) return out;

  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < a.cols; ++c) {
    if (allowed[c]) cols.push_back(c);
  }
  if (cols.empty()) throw InfeasibleError("min_max: every column is forced to zero");

  double scale = 0.0;
  for (std::size_t r = 0; r < a.rows; ++r) {
    for (std::size_t c : cols) {
      if (a(r, c) < 0.0) throw ContractError("min_max: coefficients must be nonnegative");
      scale = std::max(scale, a(r, c));
    }
  }
  for (std::size_t c : cols) {
    bool zero = true;
    for (std::size_t r = 0; r < a.rows && zero; ++r) zero = a(r, c) == 0.0;
    if (zero) {
      out.x[c] = total;
      out.free_column = true;
      return out;
    }
  }

  // Variables: x over the allowed columns (normalized to sum 1), then z.
  const std::size_t k = cols.size();
  LinearProgram lp;
  lp.num_vars = k + 1;
  lp.objective.assign(k + 1, 0.0);
  lp.objective[k] = 1.0;
  for (std::size_t r = 0; r < a.rows; ++r) {
    Constraint row{std::vector<double>(k + 1, 0.0), Sense::less_equal, 0.0};
    bool any = false;
    for (std::size_t j = 0; j < k; ++j) {
      row.coeffs[j] = a(r, cols[j]) / scale;
      any = any || row.coeffs[j] != 0.0;
    }
    if (!any) continue;
    row.coeffs[k] = -1.0;
    lp.constraints.push_back(std::move(row));
  }
  Constraint sum{std::vector<double>(k + 1, 1.0), Sense::equal, 1.0};
  sum.coeffs[k] = 0.0;
  lp.constraints.push_back(std::move(sum));

  const Result res = minimize(lp, options);
  if (res.status != Status::optimal) {
    throw Error(std::string("min_max: simplex ended with status ") + to_string(res.status));
  }
  out.iterations = res.iterations;

  double mass = 0.0;
  for (std::size_t j = 0; j < k; ++j) mass += res.x[j];
  for (std::size_t j = 0; j < k; ++j) out.x[cols[j]] = total * (res.x[j] / mass);
  for (std::size_t r = 0; r < a.rows; ++r) {
    double v = 0.0;
    for (std::size_t c : cols) v += a(r, c) * out.x[c];
    out.value = std::max(out.value, v);
  }
  return out;
}

}  // namespace offload::lp
