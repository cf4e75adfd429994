#include <doctest.h>

#include <fstream>
#include <sstream>

#include <multifid/ensemble.hpp>
#include <multifid/objectives.hpp>
#include <multifid/optimizer.hpp>
#include <multifid/run_io.hpp>

#include "support.hpp"

using namespace multifid;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}


RunHistory write_run(const std::filesystem::path& dir, std::uint64_t seed, std::size_t n_predictions) {
  const auto s1 = testing::space("space1.json");
  auto params = SyntheticCurveParams::standard(s1->dimension());
  params.n_validation_instances = n_predictions;
  auto obj = std::make_shared<SyntheticCurveObjective>(s1, params);
  RunMeta meta;
  meta.objective = obj->describe();
  meta.space_path = "space1.json";
  meta.ladder = budget_ladder(12, 50, 2);
  meta.limits.max_iterations = 4;
  meta.limits.seed = seed;
  RunWriter writer(dir, *s1, meta, obj->validation_labels());
  RunOptions o;
  o.limits = meta.limits;
  o.on_record = [&](const EvaluationRecord& r, const JobResult& res) { writer.write_record(r, res); };
  auto h = run(s1, obj, meta.ladder, o);
  writer.finalize(h);
  return h;
}

}  // namespace

TEST_SUITE("run_io") {
  TEST_CASE("format_double is shortest round-trip") {
    CHECK(format_double(0.5931) == "0.5931");
    CHECK(format_double(12) == "12");
    CHECK(format_double(1e-7) == "1e-07");
    Rng rng(1);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 1000; ++i) {
      const double v = u(rng);
      CHECK(std::stod(format_double(v)) == v);
    }
  }

  TEST_CASE("records round-trip through JSON") {
    const auto s2 = testing::space("space2.json");
    Rng rng(2);
    EvaluationRecord r;
    r.config_id = 42;
    r.configuration = s2->sample_uniform(rng);
    r.budget = 25;
    r.seed = 7;
    r.loss = 0.123456789;
    r.crashed = false;
    r.learning_curve = std::vector<double>{0.9, 0.5, 0.25};
    r.wall_time = 25;
    r.timestamp = 100.5;
    r.origin = Origin::portfolio;
    r.bracket = 3;
    r.rung = 1;
    const auto back = EvaluationRecord::from_json(json::parse(r.to_json().dump()), *s2);
    CHECK(back.to_json() == r.to_json());
    CHECK(back.configuration == r.configuration);
    CHECK(back.origin == Origin::portfolio);
    CHECK_THROWS(origin_from_string("bogus"));
  }

  TEST_CASE("run directory layout and reload") {
    testing::TempDir dir("runio");
    const auto h = write_run(dir.path(), 3, 30);
    for (const char* f : {"space.json", "runhistory.jsonl", "trajectory.csv", "meta.json", "predictions/labels.csv",
                          "predictions/manifest.json"})
      CHECK(std::filesystem::exists(dir / f));
    const auto loaded = load_run(dir.path());
    REQUIRE(loaded.history.size() == h.size());
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(loaded.history.records()[i].to_json() == h.records()[i].to_json());
    CHECK(loaded.meta["n_records"] == h.size());
    CHECK(loaded.meta["ladder"]["b_max"] == 50.0);
    CHECK(loaded.history.trajectory_budget() == 50.0);

    std::istringstream traj(slurp(dir / "trajectory.csv"));
    std::string header;
    std::getline(traj, header);
    CHECK(header == "wall_time_s,n_evals,budget,incumbent_loss");

    const auto store = load_prediction_store(dir / "predictions");
    CHECK(store.entries.size() == h.size());
    CHECK(store.labels.size() == 30);
    store.validate();
  }

  TEST_CASE("run ids are deterministic in the inputs") {
    RunMeta a;
    a.objective = "synthetic:default";
    a.space_path = "space1.json";
    a.ladder = budget_ladder(12, 50, 2);
    RunMeta b = a;
    CHECK(a.run_id() == b.run_id());
    b.limits.seed = 1;
    CHECK(a.run_id() != b.run_id());
  }

  TEST_CASE("a torn final line is ignored, earlier damage is not") {
    testing::TempDir dir("torn");
    const auto h = write_run(dir.path(), 4, 0);
    const auto text = slurp(dir / "runhistory.jsonl");
    const auto s1 = testing::space("space1.json");
    {
      std::ofstream out(dir / "runhistory.jsonl", std::ios::trunc | std::ios::binary);
      out << text.substr(0, text.size() - 20);
    }
    const auto torn = read_runhistory(dir / "runhistory.jsonl", *s1);
    CHECK(torn.size() == h.size() - 1);
    {
      std::ofstream out(dir / "runhistory.jsonl", std::ios::trunc | std::ios::binary);
      out << "{not json\n" << text;
    }
    CHECK_THROWS(read_runhistory(dir / "runhistory.jsonl", *s1));
  }

  TEST_CASE("matrix CSV round trip") {
    testing::TempDir dir("matrix");
    Matrix m(3, 2, std::vector<double>{0.1, 0.9, 1.0 / 3.0, 2.0 / 3.0, 0.5, 0.5});
    write_matrix_csv(dir / "m.csv", m);
    CHECK(read_matrix_csv(dir / "m.csv") == m);
    std::ofstream(dir / "ragged.csv") << "0.1,0.9\n0.5\n";
    CHECK_THROWS(read_matrix_csv(dir / "ragged.csv"));
  }
}
