#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "knotfit/genlasso.hpp"
#include "knotfit/scattered.hpp"
#include "knotfit/synthetic.hpp"
#include "knotfit/tensor.hpp"

namespace knotfit {

enum class SamplingMode { KnotsInSample, UniformRandom };
enum class ExperimentKind { OneDim, Grid2D, Scattered };

struct ExperimentConfig {
    std::string name;
    std::string function = "f1";
    ExperimentKind kind = ExperimentKind::OneDim;
    SamplingMode mode = SamplingMode::KnotsInSample;
    double sigma = 0.1;
    int replications = 10;
    /// Observation counts; per-axis counts for Grid2D.
    std::vector<int> schedule;
    int degree = 2;
    PathConfig path;
    std::uint64_t seed = 0;
    /// Reference grid size (per axis for d = 2).
    int grid_points = 201;
    /// Wall-clock columns are filled only when enabled; timings are not
    /// reproducible byte-for-byte.
    bool timing = false;
};

/// Named experiment presets.  sigma < 0 keeps the preset default;
/// replications <= 0 keeps 10.
ExperimentConfig make_experiment(const std::string& name, double sigma = -1.0,
                                 int replications = 0, std::uint64_t seed = 0);
const std::vector<std::string>& experiment_names();

struct CellResult {
    int n = 0;
    int replication = 0;
    bool failed = false;
    std::string error;
    std::optional<double> lambda_ebic;
    std::optional<int> k_total;
    std::vector<int> k_per_dim;
    std::optional<double> d1, d2;  // worst case over dimensions
    std::vector<double> d1_per_dim, d2_per_dim;
    std::optional<double> sup_ebic, sup_opt;
    double wall_ms = 0.0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<CellResult> cells;  // ordered by (n, replication)
};

/// Runs every (n, replication) cell; failures are recorded per cell and do
/// not abort the sweep.  Replications run concurrently.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// One row per cell:
/// function,n,replication,sigma,q,lambda_ebic,k_lambda,d1,d2,supnorm_ebic,supnorm_opt,wall_ms
void write_results_csv(const ExperimentReport& report, std::ostream& out);

/// Per-n aggregates (medians and means over the defined cells).
void write_summary_csv(const ExperimentReport& report, std::ostream& out);

// --- sampling (exposed for tests) ---

struct Sample1D {
    std::vector<double> x;
    Eigen::VectorXd y;
};

/// Evenly spaced reference locations on [0, 1].
std::vector<double> reference_grid(int n_points);

Sample1D sample_observations_1d(const ExperimentConfig& config, int n, int replication);
GridDataset sample_observations_2d(const ExperimentConfig& config, int n_axis,
                                   int replication);
ScatteredDataset sample_observations_nd(const ExperimentConfig& config, int n,
                                        int replication);

}  // namespace knotfit
