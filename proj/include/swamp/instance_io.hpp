#pragma once

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "model.hpp"

namespace swamp {

inline constexpr const char* kInstanceFormat = "swamp-instance";
inline constexpr int kInstanceFormatVersion = 1;

/// JSON container:
///   { "format": "swamp-instance", "version": 1, "M", "N",
///     "storage": "dense" | "sparse",
///     "values": [row-major M*N]              (dense)
///     "entries": [[row, col, value], ...]    (sparse, row-major order)
///     "y", "x_true" (array or null),
///     "channel": {"kind": "awgn", "delta"} | {"kind": "sign"},
///     "prior": {"rho", "mean", "var"}, "seed" }
/// Doubles are written with round-trip precision.
inline nlohmann::json instance_to_json(const ProblemInstance& inst)
{
    using nlohmann::json;
    json j;
    j["format"] = kInstanceFormat;
    j["version"] = kInstanceFormatVersion;
    j["M"] = inst.rows();
    j["N"] = inst.cols();
    if (inst.matrix.is_sparse()) {
        j["storage"] = "sparse";
        json entries = json::array();
        for (const auto& t : inst.matrix.triplets())
            entries.push_back(json::array({t.row, t.col, t.value}));
        j["entries"] = std::move(entries);
    } else {
        j["storage"] = "dense";
        j["values"] = inst.matrix.to_dense();
    }
    j["y"] = inst.y;
    j["x_true"] = inst.x_true ? json(*inst.x_true) : json(nullptr);
    if (const auto* awgn = std::get_if<AwgnChannel>(&inst.channel))
        j["channel"] = {{"kind", "awgn"}, {"delta", awgn->delta}};
    else
        j["channel"] = {{"kind", "sign"}};
    j["prior"] = {{"rho", inst.prior.rho}, {"mean", inst.prior.mean}, {"var", inst.prior.var}};
    j["seed"] = inst.seed;
    return j;
}

inline ProblemInstance instance_from_json(const nlohmann::json& j)
{
    try {
        if (j.at("format").get<std::string>() != kInstanceFormat)
            throw std::invalid_argument("not a swamp instance file");
        if (j.at("version").get<int>() != kInstanceFormatVersion)
            throw std::invalid_argument("unsupported instance format version");
        const auto rows = j.at("M").get<std::size_t>();
        const auto cols = j.at("N").get<std::size_t>();
        const auto storage = j.at("storage").get<std::string>();

        ProblemInstance inst;
        if (storage == "dense") {
            inst.matrix = MeasurementMatrix::dense(rows, cols, j.at("values").get<Vector>());
        } else if (storage == "sparse") {
            std::vector<Triplet> entries;
            for (const auto& e : j.at("entries"))
                entries.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(), e.at(2).get<double>()});
            inst.matrix = MeasurementMatrix::sparse(rows, cols, std::move(entries));
        } else {
            throw std::invalid_argument("unknown storage kind '" + storage + "'");
        }
        inst.y = j.at("y").get<Vector>();
        if (!j.at("x_true").is_null())
            inst.x_true = j.at("x_true").get<Vector>();
        const auto& ch = j.at("channel");
        const auto kind = ch.at("kind").get<std::string>();
        if (kind == "awgn")
            inst.channel = AwgnChannel{ch.at("delta").get<double>()};
        else if (kind == "sign")
            inst.channel = SignChannel{};
        else
            throw std::invalid_argument("unknown channel kind '" + kind + "'");
        const auto& p = j.at("prior");
        inst.prior = {p.at("rho").get<double>(), p.at("mean").get<double>(), p.at("var").get<double>()};
        inst.seed = j.at("seed").get<std::uint64_t>();
        inst.validate();
        return inst;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed instance: ") + e.what());
    }
}

inline void save_instance(const ProblemInstance& inst, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write instance file '" + path + "'");
    out << instance_to_json(inst).dump() << '\n';
    if (!out)
        throw std::runtime_error("failed writing instance file '" + path + "'");
}

inline ProblemInstance load_instance(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open instance file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("instance file '" + path + "' is not valid JSON: " + e.what());
    }
    return instance_from_json(j);
}

/// Debug export: dense matrices as M lines of N comma-separated values,
/// sparse matrices as `row,col,value` lines under a header.
inline void export_matrix_csv(const MeasurementMatrix& m, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    if (m.is_sparse()) {
        out << "row,col,value\n";
        for (const auto& t : m.triplets())
            out << t.row << ',' << t.col << ',' << t.value << '\n';
    } else {
        for (std::size_t r = 0; r < m.rows(); ++r) {
            for (std::size_t c = 0; c < m.cols(); ++c)
                out << (c ? "," : "") << m(r, c);
            out << '\n';
        }
    }
    if (!out)
        throw std::runtime_error("failed writing '" + path + "'");
}

} // namespace swamp
