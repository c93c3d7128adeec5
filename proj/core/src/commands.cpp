#include "knotfit/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "knotfit/csv.hpp"
#include "knotfit/fit1d.hpp"
#include "knotfit/harness.hpp"
#include "knotfit/model_io.hpp"
#include "knotfit/scattered.hpp"
#include "knotfit/tensor.hpp"

namespace knotfit {

namespace {

using json = nlohmann::ordered_json;

struct GridLayout {
    bool is_grid = false;
    std::vector<double> axis1, axis2;
    Eigen::VectorXd y;
};

/// Exact-match grid detection: the rows form a grid iff every combination of
/// the distinct coordinate values appears exactly once.
GridLayout detect_grid(const CsvTable& table) {
    GridLayout out;
    std::map<double, int> v1, v2;
    for (const auto& row : table.rows) {
        v1.emplace(row[0], 0);
        v2.emplace(row[1], 0);
    }
    const std::size_t n1 = v1.size();
    const std::size_t n2 = v2.size();
    if (n1 * n2 != table.rows.size() || n1 < 2 || n2 < 2) return out;
    int idx = 0;
    for (auto& [k, v] : v1) v = idx++;
    idx = 0;
    for (auto& [k, v] : v2) v = idx++;

    std::vector<int> count(n1 * n2, 0);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n1 * n2));
    for (const auto& row : table.rows) {
        const std::size_t cell = static_cast<std::size_t>(v1[row[0]]) * n2 +
                                 static_cast<std::size_t>(v2[row[1]]);
        if (++count[cell] > 1) return out;
        y[static_cast<Eigen::Index>(cell)] = row[2];
    }
    out.is_grid = true;
    for (const auto& [k, v] : v1) out.axis1.push_back(k);
    for (const auto& [k, v] : v2) out.axis2.push_back(k);
    out.y = std::move(y);
    return out;
}

std::string fit_config_json(const FitCommandOptions& o, int dims, const std::string& branch) {
    json j;
    j["command"] = "fit";
    j["input"] = o.input_csv;
    j["dims"] = dims;
    j["degree"] = o.degree;
    j["grid_size"] = o.grid_size;
    j["lambda_min_ratio"] = o.lambda_min_ratio;
    j["mode"] = o.mode;
    j["branch"] = branch;
    j["seed"] = o.seed;
    return j.dump();
}

}  // namespace

int cmd_fit(const FitCommandOptions& options, std::ostream& out, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (options.mode != "auto" && options.mode != "grid" && options.mode != "cluster") {
            throw std::invalid_argument("mode must be auto, grid, or cluster");
        }
        const CsvTable table = read_csv_file(options.input_csv);
        const int d = options.dims > 0 ? options.dims : table.cols() - 1;
        if (d < 1) throw std::invalid_argument("need at least one coordinate column");
        if (table.cols() != d + 1) {
            std::ostringstream msg;
            msg << "expected " << d + 1 << " columns (" << d
                << " coordinates + response), got " << table.cols();
            throw std::invalid_argument(msg.str());
        }
        if (table.rows.empty()) throw std::invalid_argument("input has no data rows");

        PathConfig path;
        path.grid_size = options.grid_size;
        path.lambda_min_ratio = options.lambda_min_ratio;

        ModelFile model_file;
        std::string summary;

        if (d == 1) {
            std::vector<double> x;
            Eigen::VectorXd y(static_cast<Eigen::Index>(table.rows.size()));
            for (std::size_t i = 0; i < table.rows.size(); ++i) {
                x.push_back(table.rows[i][0]);
                y[static_cast<Eigen::Index>(i)] = table.rows[i][1];
            }
            Fit1DOptions opts;
            opts.degree = options.degree;
            opts.path = path;
            const Fit1DResult fit = fit_1d(y, x, opts);
            model_file = ModelFile::from_1d(fit.model, fit_config_json(options, 1, "1d"));
            std::ostringstream s;
            s << "fit 1d: n=" << x.size() << " q=" << options.degree
              << " knots=" << fit.model.knots.num_interior()
              << " ebic=" << format_double(fit.model.ebic);
            summary = s.str();
        } else {
            GridLayout grid;
            if (d == 2 && options.mode != "cluster") grid = detect_grid(table);
            if (options.mode == "grid" && !grid.is_grid) {
                throw std::invalid_argument(
                    d == 2 ? "input is not a full grid (grid mode supports complete 2-d grids only)"
                           : "grid mode supports two coordinate columns only");
            }

            if (grid.is_grid) {
                GridDataset data = GridDataset::make(grid.axis1, grid.axis2, grid.y);
                Fit2DOptions opts;
                opts.degree = options.degree;
                opts.path = path;
                const Fit2DResult fit = fit_2d(data, opts);
                model_file = ModelFile::from_tensor(
                    fit.model, fit_config_json(options, d, "grid"), fit.selected_lambda1,
                    fit.selected_lambda2);
                std::ostringstream s;
                s << "fit grid: n=" << data.n() << " (" << data.n1() << "x" << data.n2()
                  << ") q=" << options.degree << " knots=["
                  << fit.model.knots[0].num_interior() << ","
                  << fit.model.knots[1].num_interior()
                  << "] ebic=" << format_double(fit.model.ebic)
                  << " skipped_cells=" << fit.skipped_cells;
                summary = s.str();
            } else {
                Eigen::MatrixXd pts(static_cast<Eigen::Index>(table.rows.size()), d);
                Eigen::VectorXd y(static_cast<Eigen::Index>(table.rows.size()));
                for (std::size_t i = 0; i < table.rows.size(); ++i) {
                    for (int c = 0; c < d; ++c) pts(static_cast<Eigen::Index>(i), c) = table.rows[i][static_cast<std::size_t>(c)];
                    y[static_cast<Eigen::Index>(i)] = table.rows[i][static_cast<std::size_t>(d)];
                }
                ScatteredDataset data = ScatteredDataset::make(std::move(pts), std::move(y));
                FitNdOptions opts;
                opts.degree = options.degree;
                opts.path = path;
                opts.seed = options.seed;
                const FitNdResult fit = fit_nd(data, opts);
                model_file = ModelFile::from_tensor(fit.model,
                                                    fit_config_json(options, d, "cluster"));
                std::ostringstream s;
                s << "fit cluster: n=" << data.n() << " d=" << d << " q=" << options.degree
                  << " knots=[";
                for (int j = 0; j < fit.model.dims(); ++j) {
                    if (j) s << ",";
                    s << fit.model.knots[static_cast<std::size_t>(j)].num_interior();
                }
                s << "] ebic=" << format_double(fit.model.ebic)
                  << " skipped_cells=" << fit.skipped_cells;
                summary = s.str();
            }
        }

        save_model(options.out_path, model_file);
        const double ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
        out << summary << " wall_ms=" << static_cast<long>(ms) << " -> "
            << options.out_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_predict(const PredictCommandOptions& options, std::ostream& out, std::ostream& err) {
    (void)out;
    try {
        const ModelFile model_file = load_model(options.model_path);
        const CsvTable table = read_csv_file(options.points_csv);
        if (table.cols() != model_file.dimension) {
            std::ostringstream msg;
            msg << "model expects " << model_file.dimension << " coordinate columns, got "
                << table.cols();
            throw std::invalid_argument(msg.str());
        }

        std::vector<int> out_of_domain;
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            for (int c = 0; c < model_file.dimension; ++c) {
                const double v = table.rows[i][static_cast<std::size_t>(c)];
                if (v < model_file.dims[static_cast<std::size_t>(c)].lower ||
                    v > model_file.dims[static_cast<std::size_t>(c)].upper) {
                    out_of_domain.push_back(static_cast<int>(i) + 1);
                    break;
                }
            }
        }
        if (!out_of_domain.empty()) {
            std::ostringstream msg;
            msg << "points outside the model domain at row";
            if (out_of_domain.size() > 1) msg << 's';
            for (std::size_t i = 0; i < out_of_domain.size(); ++i) {
                msg << (i ? ", " : " ") << out_of_domain[i];
            }
            throw std::invalid_argument(msg.str());
        }

        std::ostringstream body;
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            if (c) body << ',';
            body << table.header[c];
        }
        body << ",prediction\n";

        if (model_file.dimension == 1) {
            const FittedSplineModel model = model_file.to_1d();
            for (const auto& row : table.rows) {
                body << format_double(row[0]) << ','
                     << format_double(model.predict(row[0])) << '\n';
            }
        } else {
            const FittedTensorModel model = model_file.to_tensor();
            for (const auto& row : table.rows) {
                for (double v : row) body << format_double(v) << ',';
                body << format_double(model.predict(row)) << '\n';
            }
        }

        write_file_atomic(options.out_path, body.str());
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_bench(const BenchCommandOptions& options, std::ostream& out, std::ostream& err) {
    try {
        ExperimentConfig cfg =
            make_experiment(options.experiment, options.sigma, options.reps, options.seed);
        cfg.path.grid_size = options.grid_size;
        cfg.path.lambda_min_ratio = options.lambda_min_ratio;
        cfg.timing = options.timing;

        const ExperimentReport report = run_experiment(cfg);

        std::filesystem::create_directories(options.out_dir);
        const auto join = [&](const char* name) {
            return (std::filesystem::path(options.out_dir) / name).string();
        };

        std::ostringstream results, summary;
        write_results_csv(report, results);
        write_summary_csv(report, summary);
        write_file_atomic(join("results.csv"), results.str());
        write_file_atomic(join("summary.csv"), summary.str());

        json cj;
        cj["command"] = "bench";
        cj["experiment"] = cfg.name;
        cj["function"] = cfg.function;
        cj["sigma"] = cfg.sigma;
        cj["replications"] = cfg.replications;
        cj["schedule"] = cfg.schedule;
        cj["degree"] = cfg.degree;
        cj["mode"] = cfg.mode == SamplingMode::KnotsInSample ? "knots-in-sample" : "uniform-random";
        cj["grid_size"] = cfg.path.grid_size;
        cj["lambda_min_ratio"] = cfg.path.lambda_min_ratio;
        cj["tol"] = cfg.path.tol;
        cj["max_iter"] = cfg.path.max_iter;
        cj["seed"] = cfg.seed;
        cj["grid_points"] = cfg.grid_points;
        cj["timing"] = cfg.timing;
        const std::string config_text = cj.dump(2) + "\n";
        json wrapped = json::parse(config_text);
        wrapped["config_hash"] = fnv1a_hex(config_text);
        write_file_atomic(join("config.json"), wrapped.dump(2) + "\n");

        int failures = 0;
        for (const auto& cell : report.cells) failures += cell.failed ? 1 : 0;
        out << "bench " << cfg.name << ": " << report.cells.size() << " cells, " << failures
            << " failures -> " << options.out_dir << "\n";
        for (const auto& cell : report.cells) {
            if (cell.failed) {
                err << "cell n=" << cell.n << " rep=" << cell.replication << ": "
                    << cell.error << "\n";
            }
        }
        // per-cell failures are recorded in the CSV; the sweep itself succeeded
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace knotfit
