#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sgldv/kernel_engine.hpp"

namespace sgldv {

// Cell-centred grid over the box [lo, hi]^d with N cells per axis. States are
// the cells meeting Omega; boundary cells are clipped to Omega.
struct Grid {
  int dim = 1;
  double lo = 0.0;
  double hi = 0.0;
  int N = 0;
  double h() const { return (hi - lo) / N; }
  double center(int k) const { return lo + (k + 0.5) * h(); }
  // Tight cover of B(0, R) with N cells per axis.
  static Grid covering(int dim, double R, int N);
};

void validate_grid(const Grid& grid, double R);

struct KernelState {
  Vector point;      // source point inside Omega (cell centre, or its projection)
  Box region;        // bounding box of cell intersected with Omega
  std::vector<int> cell;  // per-axis cell index
};

enum class KernelKind { Lazy, Metropolized };

std::string to_string(KernelKind kind);

struct KernelBuildOptions {
  double row_sum_tolerance = 1e-8;
  int jobs = 1;
  int subcell_intervals = 16;  // Simpson intervals per cell (target masses, 2D x-direction)
};

// Row-stochastic matrix in compressed sparse row form with sorted columns.
class DiscretizedKernel {
 public:
  DiscretizedKernel() = default;
  static DiscretizedKernel from_dense(const Matrix& T, std::optional<Vector> stationary = std::nullopt);

  int size() const { return static_cast<int>(row_ptr_.size()) - 1; }
  double at(int i, int j) const;
  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& cols() const { return cols_; }
  const std::vector<double>& values() const { return values_; }
  Matrix dense() const;

  const std::optional<Vector>& stationary() const { return stationary_; }
  void set_stationary(Vector pi) { stationary_ = std::move(pi); }

  // Cell masses of the truncated target (set when built from a model).
  const std::optional<Vector>& target_masses() const { return target_masses_; }
  const std::vector<KernelState>& states() const { return states_; }
  KernelKind kind() const { return kind_; }
  // Largest |sum_j continuous mass - p(u)| / 2 seen before renormalization.
  double max_row_deviation() const { return max_row_deviation_; }

  double max_row_sum_error() const;
  double min_diagonal() const;
  double min_entry() const;

  friend DiscretizedKernel build_discretized_kernel(const KernelEngine&, const Grid&, KernelKind,
                                                    const KernelBuildOptions&);

 private:
  std::vector<int> row_ptr_{0};
  std::vector<int> cols_;
  std::vector<double> values_;
  std::optional<Vector> stationary_;
  std::optional<Vector> target_masses_;
  std::vector<KernelState> states_;
  KernelKind kind_ = KernelKind::Lazy;
  double max_row_deviation_ = 0.0;
};

// Cell-to-cell masses of the continuous part plus lumped atoms on the
// diagonal; the Metropolized kind applies the acceptance cell-wise against
// the target cell masses and returns rejected mass to the diagonal.
DiscretizedKernel build_discretized_kernel(const KernelEngine& engine, const Grid& grid,
                                           KernelKind kind,
                                           const KernelBuildOptions& options = KernelBuildOptions{});

std::vector<KernelState> kernel_states(const Grid& grid, double R);

// Truncated-target mass of each state's region, normalized to sum 1.
Vector target_cell_masses(const TargetModel& model, double beta, const std::vector<KernelState>& states,
                          double R, int subcell_intervals = 16);

// max_{i != j} |pi_i T_ij - pi_j T_ji| / max_{i != j} pi_i T_ij.
double detailed_balance_residual(const DiscretizedKernel& kernel, const Vector& pi);

struct SandwichReport {
  double delta = 0.0;
  int pairs_checked = 0;
  int violations = 0;
  double worst_ratio_deviation = 0.0;  // max |T / T* - 1| over pairs with T* > 0
  double worst_upper_slack = 0.0;      // min of (1 + delta) T* - T
  double worst_lower_slack = 0.0;      // min of T - (1 - delta) T*
  bool holds() const { return violations == 0; }
};

// Checks (1 - delta) T*_u(A) <= T_u(A) <= (1 + delta) T*_u(A) with absolute
// slack `tolerance` for every point and set.
SandwichReport delta_sandwich_check(const KernelEngine& engine, double delta,
                                    const std::vector<SetSpec>& sets,
                                    const std::vector<Vector>& points, double tolerance = 1e-8,
                                    int jobs = 1);

struct KernelTvReport {
  double tv_metropolized = 0.0;  // between Metropolized cell-mass vectors
  double tv_unrestricted = 0.0;  // between unlazy, unrestricted SGLD proposals
  double bound = 0.0;            // (1 + L eta) |u - v| / sqrt(2 eta / beta)
};

KernelTvReport kernel_tv_distance(const KernelEngine& engine, const Grid& grid, const Vector& u,
                                  const Vector& v);

}  // namespace sgldv
