#pragma once

// Serialized form of one estimator run. JSON keys are fixed:
// {config, estimate, analytic_target, z_score, wall_time_seconds}.

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"

#include "qcut/experiments.hpp"

namespace qcut::report {

struct ReportRecord {
    experiments::ExperimentConfig config;
    experiments::FidelityEstimate estimate;
    double wall_time_seconds = 0.0;
};

inline experiments::Mode parse_mode(const std::string& s) {
    using experiments::Mode;
    if (s == "pure") return Mode::pure;
    if (s == "entangled") return Mode::entangled;
    if (s == "mixed") return Mode::mixed;
    if (s == "state-estimation" || s == "state_estimation") return Mode::state_estimation;
    throw RangeError("unknown mode: " + s);
}

inline experiments::Method parse_method(const std::string& s) {
    using experiments::Method;
    if (s == "montecarlo") return Method::montecarlo;
    if (s == "analytic") return Method::analytic;
    if (s == "exact-moments" || s == "exact_moments") return Method::exact_moments;
    throw RangeError("unknown method: " + s);
}

namespace detail {

inline nlohmann::json optional_number(const std::optional<double>& v) {
    if (!v || !std::isfinite(*v)) return nullptr;
    return *v;
}

inline std::optional<double> read_optional(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

inline std::string csv_number(const std::optional<double>& v) {
    if (!v) return "";
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(12);
    os << *v;
    return os.str();
}

}  // namespace detail

inline nlohmann::json to_json(const ReportRecord& rec) {
    const auto& c = rec.config;
    const auto& e = rec.estimate;
    nlohmann::json config = {
        {"n", c.n},
        {"m", c.m},
        {"r", c.r},
        {"mode", std::string(experiments::to_string(c.mode))},
        {"method", std::string(experiments::to_string(c.method))},
        {"samples", c.samples},
        {"seed", c.seed},
        {"verify_bures", c.verify_bures},
    };
    nlohmann::json estimate = {
        {"mean", e.mean},
        {"stderr", e.std_error},
        {"samples", e.samples},
        {"seed", e.seed},
    };
    if (e.bures_max_deviation) estimate["bures_max_deviation"] = *e.bures_max_deviation;
    return {
        {"config", config},
        {"estimate", estimate},
        {"analytic_target", detail::optional_number(e.analytic_target)},
        {"z_score", detail::optional_number(e.z_score)},
        {"wall_time_seconds", rec.wall_time_seconds},
    };
}

inline ReportRecord from_json(const nlohmann::json& j) {
    ReportRecord rec;
    const auto& c = j.at("config");
    rec.config.n = c.at("n").get<std::size_t>();
    rec.config.m = c.at("m").get<std::size_t>();
    rec.config.r = c.at("r").get<std::size_t>();
    rec.config.mode = parse_mode(c.at("mode").get<std::string>());
    rec.config.method = parse_method(c.at("method").get<std::string>());
    rec.config.samples = c.at("samples").get<std::uint64_t>();
    rec.config.seed = c.at("seed").get<std::uint64_t>();
    rec.config.verify_bures = c.at("verify_bures").get<bool>();
    const auto& e = j.at("estimate");
    rec.estimate.mean = e.at("mean").get<double>();
    rec.estimate.std_error = e.at("stderr").get<double>();
    rec.estimate.samples = e.at("samples").get<std::uint64_t>();
    rec.estimate.seed = e.at("seed").get<std::uint64_t>();
    rec.estimate.bures_max_deviation = detail::read_optional(e, "bures_max_deviation");
    rec.estimate.analytic_target = detail::read_optional(j, "analytic_target");
    rec.estimate.z_score = detail::read_optional(j, "z_score");
    rec.wall_time_seconds = j.at("wall_time_seconds").get<double>();
    return rec;
}

inline std::string to_json_string(const ReportRecord& rec) { return to_json(rec).dump(2); }

inline std::string csv_header() {
    return "n,m,r,mode,method,samples,seed,mean,stderr,analytic_target,z_score,wall_time_seconds";
}

inline std::string to_csv_row(const ReportRecord& rec) {
    const auto& c = rec.config;
    const auto& e = rec.estimate;
    std::ostringstream os;
    os << c.n << ',' << c.m << ',' << c.r << ',' << experiments::to_string(c.mode) << ','
       << experiments::to_string(c.method) << ',' << c.samples << ',' << c.seed << ','
       << detail::csv_number(e.mean) << ',' << detail::csv_number(e.std_error) << ','
       << detail::csv_number(e.analytic_target) << ',' << detail::csv_number(e.z_score) << ','
       << detail::csv_number(rec.wall_time_seconds);
    return os.str();
}

}  // namespace qcut::report
