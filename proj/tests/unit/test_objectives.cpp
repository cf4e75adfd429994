#include <doctest.h>

#include <fstream>

#include <multifid/fixtures.hpp>
#include <multifid/objectives.hpp>
#include <multifid/replay.hpp>

#include "support.hpp"

using namespace multifid;

namespace {

std::shared_ptr<const ConfigurationSpace> unit_space(std::size_t d) {
  std::vector<HyperparameterSpec> hps;
  for (std::size_t j = 0; j < d; ++j) {
    HyperparameterSpec h;
    h.name = "x" + std::to_string(j + 1);
    h.type = ParamType::real;
    h.default_value = 0.5;
    hps.push_back(h);
  }
  return std::make_shared<const ConfigurationSpace>("unit", hps, std::vector<ConditionRule>{});
}

std::size_t argmax_hits(const Matrix& m, const std::vector<int>& labels) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    hits += best == labels[i];
  }
  return hits;
}

void write_json(const std::filesystem::path& p, const json& j) {
  std::ofstream(p) << j.dump();
}

}  // namespace

TEST_SUITE("objectives") {
  TEST_CASE("the designed optimum sits at 0.05") {
    for (std::size_t d : {2u, 4u, 7u}) {
      const auto s = unit_space(d);
      const auto params = SyntheticCurveParams::standard(d);
      SyntheticCurveObjective obj(s, params);
      const auto best = s->from_unit_cube(params.primary_centre);
      CHECK(obj.asymptote(best) == doctest::Approx(0.05).epsilon(1e-12));
      Rng rng(d);
      for (int i = 0; i < 500; ++i) CHECK(obj.asymptote(s->sample_uniform(rng)) >= 0.05 - 1e-12);
      const double g = obj.decay_rate(s->sample_uniform(rng));
      CHECK(g >= 0.3);
      CHECK(g <= 1.5);
    }
  }

  TEST_CASE("noise-free curves decay monotonically toward the asymptote") {
    const auto s = testing::space("synthetic.json");
    auto params = SyntheticCurveParams::standard(s->dimension());
    params.noise = 0.0;
    SyntheticCurveObjective obj(s, params);
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
      const auto c = s->sample_uniform(rng);
      const double f_inf = obj.asymptote(c);
      REQUIRE(f_inf < params.f0);
      CHECK(obj.expected_loss(c, 12) > obj.expected_loss(c, 25));
      CHECK(obj.expected_loss(c, 25) > obj.expected_loss(c, 50));
      CHECK(std::abs(obj.expected_loss(c, 1e12) - f_inf) < 1e-3);
      const auto curve = obj.curve(c, 50, 0);
      CHECK(curve.size() == 50);
      for (std::size_t e = 1; e < curve.size(); ++e) CHECK(curve[e] <= curve[e - 1]);
      // Closed form loss(c, b) = f_inf + (f0 - f_inf) * b^-gamma.
      CHECK(curve[24] == doctest::Approx(f_inf + (params.f0 - f_inf) * std::pow(25.0, -obj.decay_rate(c))));
    }
  }

  TEST_CASE("evaluation is deterministic in configuration, budget and seed") {
    const auto s = testing::space("space1.json");
    SyntheticCurveObjective obj(s, SyntheticCurveParams::standard(s->dimension()));
    Rng rng(2);
    const auto c = s->sample_uniform(rng);
    const auto a = obj.evaluate(Job{0, c, 25, 3});
    const auto b = obj.evaluate(Job{9, c, 25, 3});
    CHECK(a.loss == b.loss);
    CHECK(a.learning_curve == b.learning_curve);
    CHECK(obj.evaluate(Job{0, c, 25, 4}).loss != a.loss);
    CHECK(a.learning_curve->size() == 25);
    CHECK(a.wall_time == 25.0);
  }

  TEST_CASE("synthesized predictions match the reported accuracy") {
    const auto s = testing::space("space1.json");
    auto params = SyntheticCurveParams::standard(s->dimension());
    params.n_validation_instances = 137;
    params.n_classes = 3;
    SyntheticCurveObjective obj(s, params);
    const auto labels = *obj.validation_labels();
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
      const auto r = obj.evaluate(Job{0, s->sample_uniform(rng), 12, 0});
      REQUIRE(r.predictions);
      const auto& m = *r.predictions;
      CHECK(m.rows() == 137);
      CHECK(m.cols() == 3);
      for (std::size_t row = 0; row < m.rows(); ++row) {
        double sum = 0;
        for (double v : m.row(row)) sum += v;
        CHECK(std::abs(sum - 1.0) < 1e-6);
      }
      const double acc = static_cast<double>(argmax_hits(m, labels)) / 137.0;
      CHECK(std::abs(acc - (1.0 - r.loss)) <= 1.0 / 137.0);
    }
  }

  TEST_CASE("synthesize_predictions hits exactly round(acc * n)") {
    const auto labels = synthesize_labels(40, 4, 7);
    for (double acc : {0.0, 0.25, 0.5, 0.61, 1.0})
      CHECK(argmax_hits(synthesize_predictions(acc, labels, 4, 11), labels) ==
            static_cast<std::size_t>(std::llround(acc * 40)));
    CHECK_THROWS(synthesize_labels(10, 1, 0));
  }

  TEST_CASE("sleep objective is deterministic") {
    SleepObjective obj(std::chrono::milliseconds(1));
    const auto s = testing::space("space1.json");
    const auto c = s->default_configuration();
    CHECK(obj.evaluate(Job{0, c, 12, 0}).loss == obj.evaluate(Job{1, c, 12, 0}).loss);
  }

  TEST_CASE("replay answers from stored curves bit-exactly") {
    auto bundle = std::make_shared<const ReplayBundle>(load_replay(testing::data_path("mini_lcbench/adult.json")));
    CHECK(bundle->records.size() == 200);
    CHECK(bundle->b_max == 50);
    ReplayObjective obj(bundle, ReplayMode::strict);
    for (std::size_t i = 0; i < bundle->records.size(); i += 7) {
      const auto& rec = bundle->records[i];
      for (int b : {12, 25, 50}) {
        const auto r = obj.evaluate(Job{0, rec.config, static_cast<double>(b), rec.seed});
        CHECK(r.loss == 1.0 - rec.val_curve[static_cast<std::size_t>(b) - 1]);
        CHECK(r.learning_curve->size() == static_cast<std::size_t>(b));
        REQUIRE(r.predictions);
        const double acc = static_cast<double>(argmax_hits(*r.predictions, obj.labels())) /
                           static_cast<double>(obj.labels().size());
        CHECK(std::abs(acc - rec.val_curve[static_cast<std::size_t>(b) - 1]) <= 1.0 / obj.labels().size());
      }
    }
    CHECK_THROWS_AS(obj.evaluate(Job{0, bundle->records[0].config, 51, 0}), ReplayError);
  }

  TEST_CASE("strict and surrogate lookups of unrecorded configurations") {
    auto bundle = std::make_shared<const ReplayBundle>(load_replay(testing::data_path("mini_lcbench/adult.json")));
    const auto& space = *bundle->space;
    auto moved = bundle->records[5].config;
    moved.set("momentum", std::get<double>(moved.at("momentum")) * 0.999 + 0.0005);
    ReplayObjective strict(bundle, ReplayMode::strict);
    CHECK_THROWS_AS(strict.lookup(moved, 0), ReplayError);
    CHECK(evaluate(strict, Job{0, moved, 12, 0}).status == JobStatus::crashed);

    ReplayObjective surrogate(bundle, ReplayMode::surrogate);
    const auto& nearest = surrogate.lookup(moved, 0);
    // Oracle: exhaustive nearest neighbour over encodings.
    const auto u = space.to_unit_cube(moved);
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t i = 0; i < bundle->records.size(); ++i) {
      const auto v = space.to_unit_cube(bundle->records[i].config);
      double d = 0;
      for (std::size_t j = 0; j < u.size(); ++j) d += (u[j] - v[j]) * (u[j] - v[j]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    CHECK(nearest.config == bundle->records[best].config);
    CHECK(best == 5);
  }

  TEST_CASE("load_replay rejects malformed bundles") {
    testing::TempDir dir("replay");
    std::filesystem::copy_file(testing::data_path("space1.json"), dir / "space1.json");
    const auto s = testing::space("space1.json");
    json rec{{"config", s->default_configuration().to_json()},
             {"seed", 0},
             {"val_curve", std::vector<double>(10, 0.5)}};
    json doc{{"dataset", "toy"}, {"space", "space1.json"}, {"b_max", 50}, {"records", json::array({rec})}};
    write_json(dir / "short.json", doc);
    try {
      load_replay(dir / "short.json");
      FAIL("expected an error");
    } catch (const ReplayError& e) {
      CHECK(std::string(e.what()).find("curve too short") != std::string::npos);
    }

    doc["records"] = json::array();
    write_json(dir / "empty.json", doc);
    CHECK_THROWS_AS(load_replay(dir / "empty.json"), ReplayError);

    rec["val_curve"] = std::vector<double>(50, 1.5);
    doc["records"] = json::array({rec});
    write_json(dir / "range.json", doc);
    CHECK_THROWS_AS(load_replay(dir / "range.json"), ReplayError);

    doc.erase("b_max");
    write_json(dir / "schema.json", doc);
    CHECK_THROWS_AS(load_replay(dir / "schema.json"), ReplayError);

    std::ofstream(dir / "broken.json") << "{\"dataset\":";
    CHECK_THROWS_AS(load_replay(dir / "broken.json"), ReplayError);
  }

  TEST_CASE("replay bundles round-trip through JSON") {
    const auto s = testing::space("space1.json");
    BundleRecipe recipe;
    recipe.dataset = "toy";
    recipe.n_configs = 12;
    recipe.b_max = 20;
    recipe.adaptive_budgets = {5, 10, 20};
    const auto bundle = record_synthetic_bundle(s, "space1.json", recipe);
    CHECK(bundle.records.size() == 12);
    CHECK(bundle.records[0].adaptive_val_curves.at(5).size() == 5);
    testing::TempDir dir("roundtrip");
    std::filesystem::copy_file(testing::data_path("space1.json"), dir / "space1.json");
    write_json(dir / "toy.json", replay_to_json(bundle));
    const auto back = load_replay(dir / "toy.json");
    REQUIRE(back.records.size() == bundle.records.size());
    for (std::size_t i = 0; i < back.records.size(); ++i) {
      CHECK(back.records[i].config == bundle.records[i].config);
      CHECK(back.records[i].val_curve == bundle.records[i].val_curve);
      CHECK(back.records[i].adaptive_val_curves == bundle.records[i].adaptive_val_curves);
    }

    // Configurations are shared across datasets of one seed.
    recipe.dataset = "other";
    recipe.variant = 3;
    const auto other = record_synthetic_bundle(s, "space1.json", recipe);
    for (std::size_t i = 0; i < other.records.size(); ++i) CHECK(other.records[i].config == bundle.records[i].config);
  }

  TEST_CASE("every bundled fixture loads with 200 configurations") {
    for (const auto& name : {"adult", "higgs", "jasmine", "vehicle", "volkert"}) {
      const auto b = load_replay(testing::data_path(std::string("mini_lcbench/") + name + ".json"));
      CHECK(b.records.size() == 200);
      CHECK(b.dataset == name);
    }
  }
}
