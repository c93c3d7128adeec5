#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "knotfit/fit1d.hpp"
#include "knotfit/tensor.hpp"

namespace knotfit {

/**
 * On-disk model: per-dimension knot vectors, the coefficient array (row
 * major, last index fastest), and a provenance block with the selection
 * outcome and the effective configuration.  Numbers are stored in a
 * round-trip-exact text form, so load(save(m)) reproduces predictions
 * bit for bit.
 */
struct ModelFile {
    int schema_version = 1;
    int dimension = 1;
    int degree = 0;

    struct Dim {
        double lower = 0.0;
        double upper = 1.0;
        std::vector<double> interior;
    };
    std::vector<Dim> dims;
    std::vector<int> shape;
    std::vector<double> coefficients;

    double ebic = 0.0;
    double ss = 0.0;
    /// 1-d: the single selected lambda; grids: the per-slice vectors.
    std::vector<double> lambda1;
    std::vector<double> lambda2;
    bool rank_warning = false;
    std::string config_json;
    std::string config_hash;

    static ModelFile from_1d(const FittedSplineModel& model, std::string config_json);
    static ModelFile from_tensor(const FittedTensorModel& model, std::string config_json,
                                 std::vector<double> lambda1 = {},
                                 std::vector<double> lambda2 = {});

    FittedSplineModel to_1d() const;
    FittedTensorModel to_tensor() const;
};

/// FNV-1a 64-bit digest in hex; used to fingerprint the configuration echo.
std::string fnv1a_hex(const std::string& text);

std::string serialize_model(const ModelFile& model);
ModelFile parse_model(const std::string& text);

/// Atomic write (temp + rename).
void save_model(const std::string& path, const ModelFile& model);
ModelFile load_model(const std::string& path);

}  // namespace knotfit
