#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace knotfit {

struct FitCommandOptions {
    std::string input_csv;
    std::string out_path = "model.json";
    int dims = -1;  // -1: infer from the column count
    int degree = 2;
    int grid_size = 50;
    double lambda_min_ratio = 1e-4;
    std::string mode = "auto";  // auto | grid | cluster
    std::uint64_t seed = 0;
};

struct PredictCommandOptions {
    std::string model_path;
    std::string points_csv;
    std::string out_path = "predictions.csv";
};

struct BenchCommandOptions {
    std::string experiment;
    double sigma = -1.0;  // <0: experiment default
    int reps = 0;         // <=0: 10
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    bool timing = false;
    int grid_size = 50;
    double lambda_min_ratio = 1e-4;
};

/// CSV in, model file out.  Returns the process exit code; diagnostics go to
/// err, the one-line summary to out.  Output files are written atomically,
/// so a failed run leaves nothing behind.
int cmd_fit(const FitCommandOptions& options, std::ostream& out, std::ostream& err);

int cmd_predict(const PredictCommandOptions& options, std::ostream& out, std::ostream& err);

/// Runs a named experiment and writes results.csv, summary.csv, and
/// config.json into the output directory.
int cmd_bench(const BenchCommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace knotfit
