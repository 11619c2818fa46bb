#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cirsplit/config.hpp"
#include "cirsplit/csv_io.hpp"
#include "cirsplit/errors.hpp"
#include "cirsplit/toml_lite.hpp"
#include "cirsplit/validation.hpp"
#include "test_helpers.hpp"

using namespace cirsplit;
using namespace cirsplit::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("cirsplit_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("double formatting round-trips exactly") {
    for (double v : {0.1, 1.0 / 3.0, 2.5e-17, 1e300, -0.0, 123456789.123456789}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("csv round trip") {
    TempDir tmp;
    CsvTable table;
    table.header = {"a", "b"};
    table.values.resize(3, 2);
    table.values << 1.0, 0.1, -2.5, 1e-9, 3.14159265358979, 7.0;
    const fs::path file = tmp.path / "t.csv";
    write_csv(file, table);
    const CsvTable back = read_csv(file);
    CHECK(back.header == table.header);
    CHECK((back.values - table.values).norm() == 0.0);
}

TEST_CASE("trajectory and dataset files") {
    TempDir tmp;
    Trajectory traj;
    traj.grid = TimeGrid{0.0, 2, 0.5, 2};
    traj.states.resize(5, 2);
    traj.states << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10;
    const fs::path fine = tmp.path / "fine.csv";
    write_trajectory_csv(fine, traj, true);
    const CsvTable table = read_csv(fine);
    CHECK(table.header == std::vector<std::string>{"t", "species_1", "species_2"});
    CHECK(table.values.rows() == 5);
    CHECK(table.values(4, 0) == doctest::Approx(1.0));
    CHECK(table.values(4, 2) == doctest::Approx(10.0));

    Dataset ds;
    ds.times = {0.0, 0.5, 1.0};
    ds.records.resize(3, 1);
    ds.records << 1.5, 2.5, 3.5;
    const fs::path dfile = tmp.path / "d.csv";
    write_dataset_csv(dfile, ds);
    const Dataset back = read_dataset_csv(dfile);
    CHECK(back.times == ds.times);
    CHECK((back.records - ds.records).norm() == 0.0);
}

TEST_CASE("cloud files") {
    TempDir tmp;
    ParticleCloud cloud;
    cloud.round = 2;
    cloud.particles.resize(3, 2);
    cloud.particles << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
    cloud.weights = make_state({0.2, 0.3, 0.5});
    cloud.distances = make_state({1.0, 2.0, 3.0});
    const fs::path file = tmp.path / "cloud.csv";
    write_cloud_csv(file, cloud);
    const ParticleCloud back = read_cloud_csv(file);
    CHECK((back.particles - cloud.particles).norm() == 0.0);
    CHECK((back.weights - cloud.weights).norm() == 0.0);
    CHECK((back.distances - cloud.distances).norm() == 0.0);
}

TEST_CASE("toml subset parsing") {
    const std::string text = R"(
# top comment
model = "two_pool"
seed = 7
theta_true = [0.1, 0.2, 0.2, 0.5, 2.0]
noisy = true

[grid]
n = 50        # intervals
delta = 0.2

[scale.desk.abc]
m_particles = 500
)";
    const nlohmann::json doc = parse_toml_lite(text);
    CHECK(doc["model"] == "two_pool");
    CHECK(doc["seed"] == 7);
    CHECK(doc["theta_true"].size() == 5);
    CHECK(doc["theta_true"][4] == 2.0);
    CHECK(doc["noisy"] == true);
    CHECK(doc["grid"]["n"] == 50);
    CHECK(doc["grid"]["delta"] == 0.2);
    CHECK(doc["scale"]["desk"]["abc"]["m_particles"] == 500);

    CHECK_THROWS_AS(parse_toml_lite("key"), config_error);
    CHECK_THROWS_AS(parse_toml_lite("[unclosed"), config_error);
    CHECK_THROWS_AS(parse_toml_lite("a = [1, 2"), config_error);
}

TEST_CASE("config loading with scale overrides") {
    TempDir tmp;
    const fs::path file = tmp.path / "exp.toml";
    std::ofstream out(file);
    out << R"(
model = "two_pool"
seed = 11
theta_true = [0.1, 0.2, 0.2, 0.5, 2.0]
x0 = [100.0, 0.0]

[grid]
n = 50
delta = 0.2
a_sub = 10

[observation]
observed = [0]
noisy = true
sigma_known = false
sigma_theta_index = 4

[prior]
low = [0.0, 0.0, 0.0, 0.0, 0.0]
high = [1.0, 5.0, 5.0, 2.0, 5.0]
infer_indices = [0, 1, 2, 3, 4]

[abc]
m_particles = 100
p_dc = 32
c_scale = 2.0

[scale.desk.abc]
m_particles = 500
r_max = 6

[scale.paper.abc]
m_particles = 10000
r_max = 20
)";
    out.close();

    const ExperimentConfig desk = load_experiment_config(file, "desk");
    CHECK(desk.abc.m_particles == 500);
    CHECK(desk.abc.r_max == 6);
    CHECK(desk.abc.dc.p_particles == 32);
    const ExperimentConfig paper = load_experiment_config(file, "paper");
    CHECK(paper.abc.m_particles == 10000);
    CHECK(paper.abc.r_max == 20);
    const ExperimentConfig plain = load_experiment_config(file, "");
    CHECK(plain.abc.m_particles == 100);

    const BuiltExperiment built = build_experiment(desk);
    CHECK(built.net->model_id() == ModelId::TwoPool);
    CHECK(built.scheme == SchemeKind::SplitTwoPoolLieTrotter);
    CHECK(built.problem.sigma_from_theta);
    CHECK(built.prior.dim() == 5);
    built.problem.validate();
}

TEST_CASE("json config mirror behaves like the toml file") {
    TempDir tmp;
    const fs::path file = tmp.path / "exp.json";
    std::ofstream out(file);
    out << R"({
        "model": "lotka_volterra",
        "seed": 3,
        "theta_true": [0.5, 0.0025, 0.3],
        "x0": [100.0, 100.0],
        "grid": {"n": 50, "delta": 1.0, "a_sub": 100},
        "observation": {"observed": [0, 1], "noisy": true, "sigma_known": true, "sigma_err": 10.0},
        "prior": {"low": [0.0, 0.0, 0.0], "high": [1.0, 0.05, 1.0], "infer_indices": [0, 1, 2]},
        "scale": {"desk": {"abc": {"m_particles": 250}}}
    })";
    out.close();
    const ExperimentConfig cfg = load_experiment_config(file, "desk");
    CHECK(cfg.model == "lotka_volterra");
    CHECK(cfg.abc.m_particles == 250);
    const BuiltExperiment built = build_experiment(cfg);
    CHECK(built.scheme == SchemeKind::SplitLotkaVolterraStrang);
    CHECK(built.problem.observed.size() == 2);
}

TEST_CASE("validation suite passes and the negative control fails") {
    const ValidationReport good = run_validation_suite(20240801);
    CHECK(good.all_pass());
    CHECK(good.criteria.size() == 4);

    ValidationTweaks corrupt;
    corrupt.bernoulli_offset = 1e-3;
    const ValidationReport bad = run_validation_suite(20240801, corrupt);
    CHECK_FALSE(bad.all_pass());

    // stable report shape
    const nlohmann::json doc = nlohmann::json::parse(good.to_json());
    CHECK(doc.contains("all_pass"));
    REQUIRE(doc.contains("criteria"));
    for (const auto& c : doc["criteria"]) {
        CHECK(c.contains("name"));
        CHECK(c.contains("pass"));
        CHECK(c.contains("detail"));
    }
}

TEST_CASE("scheme names round trip") {
    for (SchemeKind kind : {SchemeKind::EulerMaruyamaTruncate, SchemeKind::EulerMaruyamaAbs,
                            SchemeKind::SplitGenericLieTrotter, SchemeKind::SplitRepressilatorStrang,
                            SchemeKind::SplitLotkaVolterraStrang,
                            SchemeKind::SplitLotkaVolterraLieTrotter,
                            SchemeKind::SplitTwoPoolLieTrotter, SchemeKind::OdeCondLinearStrang,
                            SchemeKind::OdeRk4})
        CHECK(scheme_from_string(to_string(kind)) == kind);
    CHECK_THROWS_AS(scheme_from_string("nope"), config_error);
}
