#include "gaussalloc/report_io.hpp"

#include <cmath>

#include "gaussalloc/errors.hpp"
#include "json.hpp"

namespace gaussalloc {

namespace {

using nlohmann::ordered_json;
using nlohmann::json;

ordered_json config_json(const EstimatorConfig& cfg) {
    ordered_json j;
    j["method"] = std::string(to_string(cfg.method));
    j["quadrature_tolerance"] = cfg.quadrature_tolerance;
    j["mc_samples"] = cfg.mc_samples;
    j["seed"] = cfg.seed;
    return j;
}

ordered_json allocation_json(const Allocation& alloc) {
    ordered_json j;
    if (const auto* v = std::get_if<AllocationVector>(&alloc)) {
        j["stddevs"] = v->stddevs();
        return j;
    }
    const auto& c = std::get<CovarianceSpec>(alloc);
    const auto& m = c.matrix();
    ordered_json rows = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index q = 0; q < m.cols(); ++q) row.push_back(m(r, q));
        rows.push_back(std::move(row));
    }
    j["covariance"] = std::move(rows);
    j["means"] = c.means();
    return j;
}

std::vector<double> number_array(const json& v, const std::string& path) {
    if (!v.is_array()) throw ParseError(path, "must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) {
            throw ParseError(path + "[" + std::to_string(i) + "]", "must be a number");
        }
        out.push_back(v[i].get<double>());
    }
    return out;
}

EstimatorConfig parse_config(const json& j) {
    if (!j.is_object()) throw ParseError("config", "must be an object");
    EstimatorConfig cfg;
    try {
        if (j.contains("method")) cfg.method = method_from_string(j.at("method").get<std::string>());
        if (j.contains("quadrature_tolerance")) {
            cfg.quadrature_tolerance = j.at("quadrature_tolerance").get<double>();
        }
        if (j.contains("mc_samples")) cfg.mc_samples = j.at("mc_samples").get<std::uint64_t>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw ParseError("config", e.what());
    } catch (const InvalidArgument& e) {
        throw ParseError("config.method", e.what());
    }
    return cfg;
}

}  // namespace

std::string serialize_allocation(const Allocation& alloc) {
    return allocation_json(alloc).dump() + "\n";
}

std::string serialize_report(const SolveReport& report, const Instance& inst,
                             bool include_timing) {
    ordered_json j;
    j["algorithm"] = std::string(to_string(report.algorithm));
    j["eps"] = report.eps ? ordered_json(*report.eps) : ordered_json(nullptr);
    j["grid_step"] = report.grid_step ? ordered_json(*report.grid_step) : ordered_json(nullptr);
    j["seed"] = report.seed;
    j["config"] = config_json(report.config);
    ordered_json obj;
    obj["value"] = report.objective.value;
    obj["half_width"] = report.objective.half_width;
    obj["method"] = std::string(to_string(report.objective.method_used));
    obj["seed"] = report.objective_seed;
    j["objective"] = std::move(obj);
    j["support_size"] = report.support_size;
    j["nodes_evaluated"] = report.nodes_evaluated;
    j["allocation"] = allocation_json(report.allocation);
    j["instance"] = ordered_json::parse(serialize_instance(inst));
    if (include_timing) j["elapsed_seconds"] = report.elapsed.count();
    return j.dump(2) + "\n";
}

AllocationDocument parse_allocation_document(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("", "document must be a JSON object");

    std::optional<Instance> inst;
    if (doc.contains("instance")) {
        try {
            inst = parse_instance(doc["instance"].dump());
        } catch (const ParseError& e) {
            const std::string what = e.what();
            if (e.path().empty()) throw ParseError("instance", what);
            throw ParseError("instance." + e.path(), what.substr(e.path().size() + 2));
        }
    }

    std::optional<Estimate> objective;
    std::optional<std::uint64_t> objective_seed;
    if (doc.contains("objective")) {
        const auto& o = doc["objective"];
        if (!o.is_object() || !o.contains("value") || !o["value"].is_number()) {
            throw ParseError("objective.value", "must be a number");
        }
        Estimate e;
        e.value = o["value"].get<double>();
        if (o.contains("half_width") && o["half_width"].is_number()) {
            e.half_width = o["half_width"].get<double>();
        }
        if (o.contains("method") && o["method"].is_string()) {
            e.method_used = method_from_string(o["method"].get<std::string>());
        }
        if (o.contains("seed") && o["seed"].is_number_unsigned()) {
            objective_seed = o["seed"].get<std::uint64_t>();
        }
        objective = e;
    }
    std::optional<EstimatorConfig> config;
    if (doc.contains("config")) config = parse_config(doc["config"]);

    const std::string prefix = doc.contains("allocation") ? "allocation." : "";
    const json& a = doc.contains("allocation") ? doc["allocation"] : doc;
    if (!a.is_object()) throw ParseError("allocation", "must be an object");

    auto wrap = [&](auto&& build) -> Allocation {
        try {
            return build();
        } catch (const InvalidArgument& e) {
            throw ParseError(prefix.empty() ? "allocation" : prefix.substr(0, prefix.size() - 1),
                             e.what());
        }
    };

    if (a.contains("stddevs")) {
        auto sd = number_array(a["stddevs"], prefix + "stddevs");
        Allocation alloc = wrap([&] { return Allocation(AllocationVector(std::move(sd))); });
        return {std::move(alloc), std::move(inst), objective, objective_seed, config};
    }
    if (a.contains("covariance")) {
        const auto& rows = a["covariance"];
        const std::string path = prefix + "covariance";
        if (!rows.is_array()) throw ParseError(path, "must be an array of rows");
        const auto n = static_cast<Eigen::Index>(rows.size());
        Eigen::MatrixXd m(n, n);
        for (Eigen::Index r = 0; r < n; ++r) {
            auto row = number_array(rows[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]");
            if (static_cast<Eigen::Index>(row.size()) != n) {
                throw ParseError(path + "[" + std::to_string(r) + "]", "matrix must be square");
            }
            for (Eigen::Index q = 0; q < n; ++q) m(r, q) = row[static_cast<std::size_t>(q)];
        }
        std::vector<double> means;
        if (a.contains("means")) {
            means = number_array(a["means"], prefix + "means");
        } else if (inst) {
            means = inst->means();
        } else {
            means.assign(static_cast<std::size_t>(n), 0.0);
        }
        if (static_cast<Eigen::Index>(means.size()) != n) {
            throw ParseError(prefix + "means", "length does not match the covariance matrix");
        }
        Allocation alloc =
            wrap([&] { return Allocation(CovarianceSpec(std::move(means), std::move(m))); });
        return {std::move(alloc), std::move(inst), objective, objective_seed, config};
    }
    throw ParseError(prefix.empty() ? "stddevs" : "allocation", "missing \"stddevs\" or \"covariance\"");
}

}  // namespace gaussalloc
