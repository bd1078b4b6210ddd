#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "scatterlab/backscatter.hpp"
#include "scatterlab/config.hpp"
#include "scatterlab/datastore.hpp"

using namespace scatterlab;
using namespace scatterlab::datastore;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::path(SCATTERLAB_TEST_TMP) / "datastore";
  fs::create_directories(dir);
  return dir / name;
}

FormatErrorCode decode_code(const std::string& bytes) {
  try {
    decode_container(bytes);
  } catch (const FormatError& e) {
    return e.code();
  }
  FAIL("decode succeeded on corrupted input");
  return FormatErrorCode::io_error;
}

FarFieldDataset tiny_dataset(double shift) {
  FarFieldDataset ds;
  ds.directions = standard_directions(6);
  ds.frequencies = frequency_grid(4.0, 5.0, 0.25);
  ds.grid = make_grid(16, 0.5);
  ds.m = 3.2;
  ds.seed = 17;
  ds.tol = 1e-8;
  ds.model = "born0";
  for (std::size_t i = 0; i < 30; ++i) ds.values.push_back(cdouble(std::sin(double(i) + shift), 1.0 / (1.0 + double(i))));
  return ds;
}

}  // namespace

TEST_SUITE("datastore") {
  TEST_CASE("complex array round trip is bit exact") {
    std::vector<cdouble> data(16 * 16 * 16);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = cdouble(std::sin(0.1 * double(i)), 1.0 / (3.0 + double(i)));
    data[5] = cdouble(-0.0, 1e-310);
    auto path = scratch("roundtrip.ffpk");
    write_container(path, json{{"kind", "test"}}, {Array::complex("z", {16, 16, 16}, data)});
    auto c = read_container(path);
    CHECK(c.meta.at("kind") == "test");
    const auto& z = c.get("z");
    CHECK(z.is_complex);
    CHECK(z.shape == std::vector<std::uint64_t>{16, 16, 16});
    REQUIRE(z.c128.size() == data.size());
    CHECK(std::memcmp(z.c128.data(), data.data(), data.size() * sizeof(cdouble)) == 0);
    CHECK_THROWS_AS(c.get("missing"), FormatError);
  }

  TEST_CASE("corruption is detected with a stable code") {
    std::vector<double> data(64, 1.5);
    std::string good = encode_container(json::object(), {Array::real("x", {64}, data)});
    std::string tampered = good;
    tampered[tampered.size() - 3] ^= 0x10;
    CHECK(decode_code(tampered) == FormatErrorCode::checksum_mismatch);
    CHECK(decode_code(good.substr(0, good.size() - 8)) == FormatErrorCode::truncated);
    CHECK(decode_code(good.substr(0, 7)) == FormatErrorCode::truncated);
    CHECK(decode_code(good + "x") == FormatErrorCode::size_mismatch);
    std::string magic = good;
    magic[0] = 'G';
    CHECK(decode_code(magic) == FormatErrorCode::bad_magic);
    CHECK(decode_code("") == FormatErrorCode::truncated);
    CHECK(code_name(FormatErrorCode::checksum_mismatch) == "checksum_mismatch");
    CHECK_THROWS_WITH_AS(read_container(scratch("absent.ffpk")), doctest::Contains("io_error"), FormatError);
    CHECK_THROWS_AS(Array::real("bad", {3, 3}, data), FormatError);
  }

  TEST_CASE("potential round trip keeps the strength description") {
    auto g = make_grid(16, 0.5);
    auto h = std::make_shared<const gridfield::StrengthField>(
        gridfield::strength_preset(gridfield::Preset::two_bumps, g, 2.0, 0.3));
    auto V = gridfield::synthesize_potential(h, 3.4, 12);
    auto path = scratch("potential.ffpk");
    save_potential(path, V);
    auto W = load_potential(path);
    CHECK(W.grid == V.grid);
    CHECK(W.values == V.values);
    CHECK(W.m == 3.4);
    CHECK(W.seed == 12);
    REQUIRE(W.strength);
    CHECK(W.strength->values == h->values);
    CHECK(W.strength->preset == gridfield::Preset::two_bumps);
    CHECK(W.strength->sup_bound == 2.0);
    CHECK_THROWS_AS(load_dataset(path), FormatError);
  }

  TEST_CASE("dataset and ensemble round trips") {
    auto ds = tiny_dataset(0.0);
    auto path = scratch("dataset.ffpk");
    save_dataset(path, ds);
    auto back = load_dataset(path);
    CHECK(back.values == ds.values);
    CHECK(back.frequencies == ds.frequencies);
    CHECK(back.directions == ds.directions);
    CHECK(back.grid == ds.grid);
    CHECK(back.m == ds.m);
    CHECK(back.seed == ds.seed);
    CHECK(back.model == "born0");

    auto dir = scratch("ensemble");
    fs::remove_all(dir);
    write_ensemble(dir, {tiny_dataset(0.0), tiny_dataset(1.0), tiny_dataset(2.0)});
    CHECK(fs::exists(dir / "dataset_00002.ffpk"));
    auto ens = read_ensemble(dir);
    REQUIRE(ens.size() == 3);
    CHECK(ens[1].values == tiny_dataset(1.0).values);
    CHECK_THROWS_AS(read_ensemble(scratch("nowhere")), FormatError);
  }
}

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    auto c = config::config_from_json(json::object());
    CHECK(c == config::ExperimentConfig{});
    CHECK(c.bands() == std::vector<double>{8.0, 16.0, 32.0});
    CHECK(c.grid().n_per_axis == 64);
    CHECK(config::default_table().size() == 24);
  }

  TEST_CASE("errors name the key") {
    CHECK_THROWS_WITH_AS(config::config_from_json(json{{"field", {{"m", 4.5}}}}), doctest::Contains("'field.m'"),
                         PreconditionError);
    CHECK_THROWS_WITH_AS(config::config_from_json(json{{"band", {{"K0", 40.0}}}}), doctest::Contains("band.K0"),
                         PreconditionError);
    CHECK_THROWS_WITH_AS(config::config_from_json(json{{"grid", {{"size", 4}}}}),
                         doctest::Contains("'grid.size' is not recognised"), PreconditionError);
    CHECK_THROWS_WITH_AS(config::config_from_json(json{{"grid", {{"n", "big"}}}}), doctest::Contains("'grid.n'"),
                         PreconditionError);
    CHECK_THROWS_AS(config::config_from_json(json::array()), PreconditionError);
  }

  TEST_CASE("serialization is idempotent") {
    config::ExperimentConfig c;
    c.field_m = 3.3;
    c.band_K = 64.0;
    c.seeds_base = 99;
    auto j = config::config_to_json(c);
    auto back = config::config_from_json(j);
    CHECK(back == c);
    CHECK(config::config_to_json(back) == j);
    CHECK(config::config_hash(back) == config::config_hash(c));
    CHECK(config::config_hash(c) != config::config_hash(config::ExperimentConfig{}));
    auto path = scratch("config.json");
    std::ofstream(path) << j.dump(2);
    CHECK(config::parse_config(path) == c);
  }
}
