#include "cirsplit/csv_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cirsplit/errors.hpp"

namespace cirsplit {

std::string format_double(double v) {
    char buf[40];
    const int len = std::snprintf(buf, sizeof(buf), "%.17g", v);
    // Prefer the shortest representation that still round-trips.
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[40];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(shorter, "%lf", &back);
        if (back == v) return shorter;
    }
    return std::string(buf, static_cast<std::size_t>(len));
}

namespace {

double parse_double(const std::string& token) {
    double v = 0.0;
    const char* begin = token.data();
    const char* end = token.data() + token.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw config_error("cannot parse number: '" + token + "'");
    return v;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot open for writing: " + path.string());
    for (std::size_t i = 0; i < table.header.size(); ++i)
        out << (i ? "," : "") << table.header[i];
    out << "\n";
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < table.values.cols(); ++c)
            out << (c ? "," : "") << format_double(table.values(r, c));
        out << "\n";
    }
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open for reading: " + path.string());
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw config_error("empty CSV: " + path.string());
    table.header = split_line(line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto tokens = split_line(line);
        if (tokens.size() != table.header.size())
            throw config_error("ragged CSV row in " + path.string());
        std::vector<double> row;
        row.reserve(tokens.size());
        for (const auto& t : tokens) row.push_back(parse_double(t));
        rows.push_back(std::move(row));
    }
    table.values.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(table.header.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return table;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          bool fine_resolution) {
    const Eigen::MatrixXd states = fine_resolution ? traj.states : traj.observation_states();
    CsvTable table;
    table.header.push_back("t");
    for (Eigen::Index j = 0; j < states.cols(); ++j)
        table.header.push_back("species_" + std::to_string(j + 1));
    table.values.resize(states.rows(), states.cols() + 1);
    for (Eigen::Index r = 0; r < states.rows(); ++r) {
        table.values(r, 0) = fine_resolution ? traj.grid.fine_time(static_cast<std::size_t>(r))
                                             : traj.grid.obs_time(static_cast<std::size_t>(r));
        table.values.block(r, 1, 1, states.cols()) = states.row(r);
    }
    write_csv(path, table);
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset) {
    CsvTable table;
    table.header.push_back("t");
    for (Eigen::Index j = 0; j < dataset.records.cols(); ++j)
        table.header.push_back("y_" + std::to_string(j + 1));
    table.values.resize(dataset.records.rows(), dataset.records.cols() + 1);
    for (Eigen::Index r = 0; r < dataset.records.rows(); ++r) {
        table.values(r, 0) = dataset.times[static_cast<std::size_t>(r)];
        table.values.block(r, 1, 1, dataset.records.cols()) = dataset.records.row(r);
    }
    write_csv(path, table);
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    if (table.header.empty() || table.header.front() != "t")
        throw config_error("dataset CSV must start with a t column");
    Dataset ds;
    ds.times.resize(static_cast<std::size_t>(table.values.rows()));
    ds.records = table.values.rightCols(table.values.cols() - 1);
    for (Eigen::Index r = 0; r < table.values.rows(); ++r)
        ds.times[static_cast<std::size_t>(r)] = table.values(r, 0);
    return ds;
}

void write_dataset_provenance(const std::filesystem::path& path, const Dataset& dataset) {
    nlohmann::json doc;
    if (dataset.provenance) {
        doc["seed"] = dataset.provenance->seed;
        doc["scheme"] = dataset.provenance->scheme;
        std::vector<double> theta(dataset.provenance->theta_true.data(),
                                  dataset.provenance->theta_true.data() +
                                      dataset.provenance->theta_true.size());
        doc["theta_true"] = theta;
    }
    std::ofstream out(path);
    if (!out) throw config_error("cannot open for writing: " + path.string());
    out << doc.dump(2) << "\n";
}

void write_cloud_csv(const std::filesystem::path& path, const ParticleCloud& cloud) {
    CsvTable table;
    for (Eigen::Index j = 0; j < cloud.particles.cols(); ++j)
        table.header.push_back("theta_" + std::to_string(j + 1));
    table.header.push_back("weight");
    table.header.push_back("distance");
    table.values.resize(cloud.particles.rows(), cloud.particles.cols() + 2);
    table.values.leftCols(cloud.particles.cols()) = cloud.particles;
    table.values.col(cloud.particles.cols()) = cloud.weights;
    table.values.col(cloud.particles.cols() + 1) = cloud.distances;
    write_csv(path, table);
}

ParticleCloud read_cloud_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    if (table.header.size() < 3) throw config_error("cloud CSV needs theta, weight, distance");
    ParticleCloud cloud;
    const auto p = table.values.cols() - 2;
    cloud.particles = table.values.leftCols(p);
    cloud.weights = table.values.col(p);
    cloud.distances = table.values.col(p + 1);
    return cloud;
}

namespace {

nlohmann::json clamp_json(const ClampCounters& c) {
    return {{"eum_truncations", c.eum_truncations},
            {"radicand", c.radicand},
            {"perturbation", c.perturbation},
            {"inverse_map", c.inverse_map},
            {"total", c.total()}};
}

} // namespace

void write_diagnostics_json(const std::filesystem::path& path, const AbcRunResult& result,
                            const std::string& label) {
    nlohmann::json doc;
    doc["label"] = label;
    doc["early_stopped"] = result.early_stopped;
    doc["stop_reason"] = result.stop_reason;
    doc["pretrain_paths"] = result.pretrain_paths;
    doc["pretrain_fine_steps"] = result.pretrain_fine_steps;
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& d : result.diagnostics) {
        rounds.push_back({{"round", d.round},
                          {"epsilon", d.epsilon},
                          {"acceptance_rate", d.acceptance_rate},
                          {"ess", d.ess},
                          {"attempts", d.attempts},
                          {"cumulative_attempts", d.cumulative_attempts},
                          {"paths", d.paths},
                          {"cumulative_paths", d.cumulative_paths},
                          {"fine_steps", d.fine_steps},
                          {"cumulative_fine_steps", d.cumulative_fine_steps},
                          {"clamp_total", d.clamp_total},
                          {"degenerate_weight_events", d.degenerate_weight_events},
                          {"weight_underflows", d.weight_underflows},
                          {"perturb_rejections", d.perturb_rejections},
                          {"wall_seconds", d.wall_seconds}});
    }
    doc["rounds"] = rounds;
    std::ofstream out(path);
    if (!out) throw config_error("cannot open for writing: " + path.string());
    out << doc.dump(2) << "\n";
}

void write_run_summary_json(const std::filesystem::path& path,
                            const std::vector<RunSummary>& summaries) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& s : summaries) {
        doc.push_back({{"scheme", s.scheme},
                       {"paths", s.paths},
                       {"diverged", s.diverged},
                       {"seed", s.seed},
                       {"clamps", clamp_json(s.clamps)}});
    }
    std::ofstream out(path);
    if (!out) throw config_error("cannot open for writing: " + path.string());
    out << doc.dump(2) << "\n";
}

} // namespace cirsplit
