#include <CLI11.hpp>
#include <iostream>

#include "knotfit/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"adaptive knot selection and B-spline regression"};
    app.require_subcommand(1);

    knotfit::FitCommandOptions fit_opts;
    auto* fit = app.add_subcommand("fit", "fit a model from a CSV of observations");
    fit->add_option("input", fit_opts.input_csv, "CSV with d coordinate columns then a response")
        ->required();
    fit->add_option("--dims", fit_opts.dims, "number of coordinate columns (default: columns - 1)");
    fit->add_option("--degree", fit_opts.degree, "piecewise polynomial degree q")
        ->default_val(2);
    fit->add_option("--grid-size", fit_opts.grid_size, "penalization grid size")
        ->default_val(50);
    fit->add_option("--lambda-min-ratio", fit_opts.lambda_min_ratio,
                    "smallest grid value relative to lambda_max")
        ->default_val(1e-4);
    fit->add_option("--mode", fit_opts.mode, "auto | grid | cluster")->default_val("auto");
    fit->add_option("--seed", fit_opts.seed, "seed for the clustered mode")->default_val(0);
    fit->add_option("--out", fit_opts.out_path, "output model file")
        ->default_val("model.json");

    knotfit::PredictCommandOptions predict_opts;
    auto* predict = app.add_subcommand("predict", "evaluate a saved model on new points");
    predict->add_option("model", predict_opts.model_path, "model file from `fit`")->required();
    predict->add_option("points", predict_opts.points_csv, "CSV of coordinate columns")
        ->required();
    predict->add_option("--out", predict_opts.out_path, "output CSV with a prediction column")
        ->default_val("predictions.csv");

    knotfit::BenchCommandOptions bench_opts;
    auto* bench = app.add_subcommand("bench", "run a named synthetic experiment");
    bench->add_option("--experiment", bench_opts.experiment,
                      "f1-noise | f1-sampling | f2-noise | f2-sampling | f2-cluster")
        ->required();
    bench->add_option("--sigma", bench_opts.sigma, "noise level (default: per experiment)");
    bench->add_option("--reps", bench_opts.reps, "replications")->default_val(10);
    bench->add_option("--seed", bench_opts.seed, "base seed")->default_val(0);
    bench->add_option("--out", bench_opts.out_dir, "output directory")->default_val(".");
    bench->add_flag("--timing", bench_opts.timing,
                    "fill wall-clock columns (output is then not byte-reproducible)");
    bench->add_option("--grid-size", bench_opts.grid_size, "penalization grid size")
        ->default_val(50);
    bench->add_option("--lambda-min-ratio", bench_opts.lambda_min_ratio,
                      "smallest grid value relative to lambda_max")
        ->default_val(1e-4);

    CLI11_PARSE(app, argc, argv);

    if (fit->parsed()) return knotfit::cmd_fit(fit_opts, std::cout, std::cerr);
    if (predict->parsed()) return knotfit::cmd_predict(predict_opts, std::cout, std::cerr);
    return knotfit::cmd_bench(bench_opts, std::cout, std::cerr);
}
