#include "knotfit/model_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "knotfit/csv.hpp"

namespace knotfit {

using json = nlohmann::ordered_json;

ModelFile ModelFile::from_1d(const FittedSplineModel& model, std::string config_json) {
    ModelFile out;
    out.dimension = 1;
    out.degree = model.degree;
    out.dims = {{model.knots.lower(), model.knots.upper(), model.knots.interior()}};
    out.shape = {model.knots.num_basis()};
    out.coefficients.assign(model.gamma.data(), model.gamma.data() + model.gamma.size());
    out.ebic = model.ebic;
    out.ss = model.ss;
    out.lambda1 = {model.lambda};
    out.rank_warning = model.rank_warning;
    out.config_json = std::move(config_json);
    out.config_hash = fnv1a_hex(out.config_json);
    return out;
}

ModelFile ModelFile::from_tensor(const FittedTensorModel& model, std::string config_json,
                                 std::vector<double> lambda1, std::vector<double> lambda2) {
    ModelFile out;
    out.dimension = model.dims();
    out.degree = model.degree;
    for (const auto& akv : model.knots) {
        out.dims.push_back({akv.lower(), akv.upper(), akv.interior()});
    }
    out.shape = model.shape;
    out.coefficients.assign(model.gamma.data(), model.gamma.data() + model.gamma.size());
    out.ebic = model.ebic;
    out.ss = model.ss;
    out.lambda1 = std::move(lambda1);
    out.lambda2 = std::move(lambda2);
    out.rank_warning = model.rank_warning;
    out.config_json = std::move(config_json);
    out.config_hash = fnv1a_hex(out.config_json);
    return out;
}

FittedSplineModel to_1d_impl(const ModelFile& m) {
    if (m.dimension != 1) throw std::invalid_argument("model is not one-dimensional");
    AugmentedKnotVector akv(m.dims[0].interior, m.degree + 1, m.dims[0].lower,
                            m.dims[0].upper);
    FittedSplineModel model{std::move(akv),
                            Eigen::Map<const Eigen::VectorXd>(
                                m.coefficients.data(),
                                static_cast<Eigen::Index>(m.coefficients.size())),
                            m.degree,
                            m.lambda1.empty() ? 0.0 : m.lambda1[0],
                            m.ebic,
                            m.ss,
                            m.rank_warning};
    if (model.gamma.size() != model.knots.num_basis()) {
        throw std::invalid_argument("model file: coefficient count does not match the basis");
    }
    return model;
}

FittedSplineModel ModelFile::to_1d() const { return to_1d_impl(*this); }

FittedTensorModel ModelFile::to_tensor() const {
    if (dimension < 2) throw std::invalid_argument("model is not multi-dimensional");
    FittedTensorModel model;
    model.degree = degree;
    Eigen::Index expected = 1;
    for (const auto& dim : dims) {
        model.knots.emplace_back(dim.interior, degree + 1, dim.lower, dim.upper);
        model.shape.push_back(model.knots.back().num_basis());
        expected *= model.knots.back().num_basis();
    }
    if (static_cast<Eigen::Index>(coefficients.size()) != expected) {
        throw std::invalid_argument("model file: coefficient count does not match the basis");
    }
    model.gamma = Eigen::Map<const Eigen::VectorXd>(
        coefficients.data(), static_cast<Eigen::Index>(coefficients.size()));
    model.ebic = ebic;
    model.ss = ss;
    model.rank_warning = rank_warning;
    return model;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string serialize_model(const ModelFile& m) {
    json j;
    j["schema_version"] = m.schema_version;
    j["dimension"] = m.dimension;
    j["degree"] = m.degree;
    j["dims"] = json::array();
    for (const auto& dim : m.dims) {
        j["dims"].push_back(json{{"lower", dim.lower},
                                 {"upper", dim.upper},
                                 {"interior_knots", dim.interior}});
    }
    j["shape"] = m.shape;
    j["coefficients"] = m.coefficients;
    json prov;
    prov["ebic"] = m.ebic;
    prov["ss"] = m.ss;
    prov["lambda1"] = m.lambda1;
    prov["lambda2"] = m.lambda2;
    prov["rank_warning"] = m.rank_warning;
    prov["config"] = m.config_json.empty() ? json::object() : json::parse(m.config_json);
    prov["config_hash"] = m.config_hash;
    j["provenance"] = std::move(prov);
    return j.dump(2) + "\n";
}

ModelFile parse_model(const std::string& text) {
    json j = json::parse(text);
    ModelFile m;
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != 1) {
        throw std::invalid_argument("unsupported model schema version " +
                                    std::to_string(m.schema_version));
    }
    m.dimension = j.at("dimension").get<int>();
    m.degree = j.at("degree").get<int>();
    for (const auto& dim : j.at("dims")) {
        m.dims.push_back({dim.at("lower").get<double>(), dim.at("upper").get<double>(),
                          dim.at("interior_knots").get<std::vector<double>>()});
    }
    m.shape = j.at("shape").get<std::vector<int>>();
    m.coefficients = j.at("coefficients").get<std::vector<double>>();
    const auto& prov = j.at("provenance");
    m.ebic = prov.at("ebic").get<double>();
    m.ss = prov.at("ss").get<double>();
    m.lambda1 = prov.at("lambda1").get<std::vector<double>>();
    m.lambda2 = prov.at("lambda2").get<std::vector<double>>();
    m.rank_warning = prov.at("rank_warning").get<bool>();
    m.config_json = prov.at("config").dump();
    m.config_hash = prov.at("config_hash").get<std::string>();
    return m;
}

void save_model(const std::string& path, const ModelFile& model) {
    write_file_atomic(path, serialize_model(model));
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

}  // namespace knotfit
