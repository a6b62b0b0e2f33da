#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dro::lp {

enum class Sense { LessEqual, Equal, GreaterEqual };

struct Constraint {
  std::vector<double> coeffs;  // dense, one per variable
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

/// minimize c'x subject to the rows, x >= 0.
struct Problem {
  std::vector<double> objective;
  std::vector<Constraint> rows;

  std::size_t num_vars() const { return objective.size(); }
  void add(std::vector<double> coeffs, Sense sense, double rhs) {
    rows.push_back({std::move(coeffs), sense, rhs});
  }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Result {
  Status status = Status::IterationLimit;
  double objective = 0.0;
  std::vector<double> x;
  std::size_t iterations = 0;
  /// Phase-one infeasibility (sum of artificials) at termination.
  double infeasibility = 0.0;
};

struct Options {
  double feasibility_tol = 1e-9;
  double pivot_tol = 1e-11;
  double optimality_tol = 1e-11;
  std::size_t max_iterations = 20000;
};

/// Dense two-phase primal simplex. Dantzig pricing with a switch to Bland's
/// rule after a run of degenerate pivots; the final basic solution is
/// re-solved from the original data to remove tableau drift.
Result solve(const Problem& problem, const Options& options = {});

std::string to_string(Status status);

}  // namespace dro::lp
