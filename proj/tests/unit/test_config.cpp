#include <string>

#include "doctest.h"
#include "gmix/config.hpp"
#include "gmix/error.hpp"

using namespace gmix;

TEST_SUITE("config") {
  TEST_CASE("a full mixing config") {
    const auto cfg = parse_config(R"(
[experiment]
kind = mixing
seed = 42
replicates = 500
threads = 2
output = somewhere

[model]
type = markov
alphabet = 2
order = 1
table = 0.9, 0.1, 0.2, 0.8

[coupling]
beta = 1.5
mode = coordinate-sequential
blocks = 12
y_prefix = 1, 0
y_tail = 1
z_tail = 0
coords = 1..5
)");
    CHECK(cfg.kind == ExperimentKind::mixing);
    CHECK(cfg.seed == 42);
    CHECK(cfg.replicates == 500);
    CHECK(cfg.threads == 2);
    CHECK(cfg.output_dir == "somewhere");
    REQUIRE(cfg.model);
    CHECK(cfg.model->kind() == ModelKind::markov);
    CHECK(cfg.beta == 1.5);
    CHECK(std::holds_alternative<CoordinateSequential>(cfg.mode));
    CHECK(cfg.blocks == 12);
    CHECK(cfg.y == History({1, 0}, 1));
    CHECK(cfg.z == History({}, 0));
    CHECK(cfg.coords == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
  }

  TEST_CASE("Poisson models from closed-form sequences") {
    const auto cfg = parse_config(R"(
[experiment]
kind = poisson
seed = 1
[model]
type = poisson-ar
cutoff = 50
beta = power(1, 1.75)
gamma = constant(1)
)");
    REQUIRE(cfg.model);
    const auto* p = cfg.model->params<PoissonARParams>();
    REQUIRE(p);
    CHECK(p->beta.size() == 50);
    CHECK(p->beta[1] == doctest::Approx(std::pow(2.0, -1.75)));
  }

  TEST_CASE("missing seed, unknown keys and bad values are config errors") {
    CHECK_THROWS_AS(parse_config("[experiment]\nkind = bounds\n[model]\ntype=profile\nchi2_C=1\nchi2_delta=2\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("[experiment]\nkind = bounds\nseed = 1\ncolour = red\n"
                                 "[model]\ntype=profile\nchi2_C=1\nchi2_delta=2\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("[experiment]\nkind = teleport\nseed = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[experiment]\nkind = bounds\nseed = x\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[experiment]\nkind = bounds\nseed = 1\n[nonsense]\na = 1\n"), ConfigError);
  }

  TEST_CASE("bound experiments require beta * delta > 1 and beta >= 1") {
    const std::string head = "[experiment]\nkind = bounds\nseed = 1\n[model]\ntype = profile\nchi2_C = 1\n";
    CHECK_THROWS_AS(parse_config(head + "chi2_delta = 0.8\n[coupling]\nbeta = 1\n"), ConfigError);
    CHECK_NOTHROW(parse_config(head + "chi2_delta = 0.8\n[coupling]\nbeta = 2\n"));
    CHECK_THROWS_AS(parse_config(head + "chi2_delta = 2\n[coupling]\nbeta = 0.5\n"), ConfigError);
  }

  TEST_CASE("simulation experiments need a concrete model") {
    CHECK_THROWS_AS(
        parse_config("[experiment]\nkind = mixing\nseed = 1\n[model]\ntype=profile\nchi2_C=1\nchi2_delta=2\n"),
        ConfigError);
  }

  TEST_CASE("model parameters are validated by the model") {
    CHECK_THROWS_AS(parse_config("[experiment]\nkind = correlations\nseed = 1\n[model]\ntype = iid\np = 0.5, 0.6\n"),
                    DomainError);
  }

  TEST_CASE("index lists and sequences") {
    CHECK(parse_index_list("1, 4, 9") == std::vector<std::uint64_t>{1, 4, 9});
    CHECK(parse_index_list("3..6") == std::vector<std::uint64_t>{3, 4, 5, 6});
    const auto ls = parse_index_list("logspace(10, 1000, 3)");
    CHECK(ls == std::vector<std::uint64_t>{10, 100, 1000});
    CHECK_THROWS_AS(parse_index_list("5..2"), ConfigError);
    const auto g = parse_real_sequence("geometric(2, 0.5)", 4);
    CHECK(g == std::vector<double>{2.0, 1.0, 0.5, 0.25});
    CHECK(parse_real_sequence("0.1, 0.2", 99) == std::vector<double>{0.1, 0.2});
    CHECK_THROWS_AS(parse_real_sequence("zigzag(1)", 3), ConfigError);
  }
}
