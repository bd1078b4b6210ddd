#include "scatterlab/datastore.hpp"

#include <zlib.h>

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace scatterlab::datastore {
namespace {

constexpr char kMagic[5] = {'F', 'F', 'P', 'K', 0x01};

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}

std::uint64_t product(const std::vector<std::uint64_t>& shape) {
  std::uint64_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

[[noreturn]] void fail(FormatErrorCode code, const std::string& detail) { throw FormatError(code, detail); }

}  // namespace

std::string code_name(FormatErrorCode code) {
  switch (code) {
    case FormatErrorCode::bad_magic: return "bad_magic";
    case FormatErrorCode::truncated: return "truncated";
    case FormatErrorCode::checksum_mismatch: return "checksum_mismatch";
    case FormatErrorCode::size_mismatch: return "size_mismatch";
    case FormatErrorCode::io_error: return "io_error";
    case FormatErrorCode::bad_header: return "bad_header";
  }
  return "unknown";
}

FormatError::FormatError(FormatErrorCode code, const std::string& detail)
    : PreconditionError("ffpk " + code_name(code) + ": " + detail), code_(code) {}

Array Array::real(std::string name, std::vector<std::uint64_t> shape, std::vector<double> data) {
  if (product(shape) != data.size()) fail(FormatErrorCode::size_mismatch, "array '" + name + "' shape/data mismatch");
  Array a;
  a.name = std::move(name);
  a.shape = std::move(shape);
  a.f64 = std::move(data);
  return a;
}

Array Array::complex(std::string name, std::vector<std::uint64_t> shape, std::vector<cdouble> data) {
  if (product(shape) != data.size()) fail(FormatErrorCode::size_mismatch, "array '" + name + "' shape/data mismatch");
  Array a;
  a.name = std::move(name);
  a.shape = std::move(shape);
  a.is_complex = true;
  a.c128 = std::move(data);
  return a;
}

const Array& Container::get(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return a;
  fail(FormatErrorCode::bad_header, "missing array '" + name + "'");
}

std::uint32_t crc32_of(const void* data, std::size_t size) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  const auto* p = static_cast<const Bytef*>(data);
  while (size > 0) {
    auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = ::crc32(crc, p, chunk);
    p += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string encode_container(const json& meta, const std::vector<Array>& arrays) {
  std::string payload;
  json descriptors = json::array();
  for (const auto& a : arrays) {
    if (product(a.shape) != a.count()) fail(FormatErrorCode::size_mismatch, "array '" + a.name + "' shape/data mismatch");
    descriptors.push_back({{"name", a.name}, {"dtype", a.is_complex ? "c128" : "f64"}, {"shape", a.shape}});
    if (a.is_complex) {
      for (auto v : a.c128) {
        put_u64(payload, std::bit_cast<std::uint64_t>(v.real()));
        put_u64(payload, std::bit_cast<std::uint64_t>(v.imag()));
      }
    } else {
      for (double v : a.f64) put_u64(payload, std::bit_cast<std::uint64_t>(v));
    }
  }
  json header = {{"meta", meta.is_null() ? json::object() : meta},
                 {"arrays", descriptors},
                 {"payload_bytes", payload.size()},
                 {"crc32", crc32_of(payload.data(), payload.size())}};
  std::string text = header.dump();
  std::string out(kMagic, sizeof kMagic);
  auto len = static_cast<std::uint32_t>(text.size());
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((len >> (8 * b)) & 0xffu));
  out += text;
  out += payload;
  return out;
}

Container decode_container(const std::string& bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t prefix = std::min(bytes.size(), sizeof kMagic);
  if (bytes.compare(0, prefix, std::string(kMagic, prefix)) != 0) fail(FormatErrorCode::bad_magic, "not an FFPK v1 file");
  if (bytes.size() < sizeof kMagic + 4) fail(FormatErrorCode::truncated, "file ends inside the preamble");
  std::uint32_t len = 0;
  for (int b = 3; b >= 0; --b) len = (len << 8) | p[sizeof kMagic + static_cast<std::size_t>(b)];
  const std::size_t header_start = sizeof kMagic + 4;
  if (bytes.size() < header_start + len) fail(FormatErrorCode::truncated, "file ends inside the header");
  json header;
  try {
    header = json::parse(bytes.begin() + static_cast<long>(header_start),
                         bytes.begin() + static_cast<long>(header_start + len));
  } catch (const json::exception& e) {
    fail(FormatErrorCode::bad_header, e.what());
  }
  Container c;
  std::uint64_t declared = 0, expected_crc = 0;
  std::vector<std::tuple<std::string, bool, std::vector<std::uint64_t>>> desc;
  try {
    c.meta = header.at("meta");
    declared = header.at("payload_bytes").get<std::uint64_t>();
    expected_crc = header.at("crc32").get<std::uint64_t>();
    for (const auto& d : header.at("arrays")) {
      auto dtype = d.at("dtype").get<std::string>();
      if (dtype != "f64" && dtype != "c128") fail(FormatErrorCode::bad_header, "unknown dtype '" + dtype + "'");
      desc.emplace_back(d.at("name").get<std::string>(), dtype == "c128", d.at("shape").get<std::vector<std::uint64_t>>());
    }
  } catch (const json::exception& e) {
    fail(FormatErrorCode::bad_header, e.what());
  }
  const std::size_t payload_start = header_start + len;
  const std::size_t available = bytes.size() - payload_start;
  if (available < declared) fail(FormatErrorCode::truncated, "payload shorter than declared");
  if (available > declared) fail(FormatErrorCode::size_mismatch, "trailing bytes after the payload");
  std::uint64_t needed = 0;
  for (const auto& [name, cplx, shape] : desc) needed += product(shape) * (cplx ? 16u : 8u);
  if (needed != declared) fail(FormatErrorCode::size_mismatch, "array sizes do not add up to the payload length");
  if (crc32_of(p + payload_start, declared) != expected_crc) fail(FormatErrorCode::checksum_mismatch, "payload CRC-32 differs");
  const unsigned char* q = p + payload_start;
  for (auto& [name, cplx, shape] : desc) {
    const std::uint64_t n = product(shape);
    if (cplx) {
      std::vector<cdouble> v(n);
      for (auto& x : v) {
        x = {std::bit_cast<double>(get_u64(q)), std::bit_cast<double>(get_u64(q + 8))};
        q += 16;
      }
      c.arrays.push_back(Array::complex(name, shape, std::move(v)));
    } else {
      std::vector<double> v(n);
      for (auto& x : v) {
        x = std::bit_cast<double>(get_u64(q));
        q += 8;
      }
      c.arrays.push_back(Array::real(name, shape, std::move(v)));
    }
  }
  return c;
}

void write_container(const std::filesystem::path& path, const json& meta, const std::vector<Array>& arrays) {
  std::string bytes = encode_container(meta, arrays);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(FormatErrorCode::io_error, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(FormatErrorCode::io_error, "write failed for " + path.string());
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(FormatErrorCode::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_container(ss.str());
}

json grid_to_json(const GridSpec3& g) {
  return {{"n", g.n_per_axis}, {"L", g.box_half_width}, {"spacing", g.spacing}, {"cell_volume", g.cell_volume}};
}

GridSpec3 grid_from_json(const json& j) {
  GridSpec3 g;
  try {
    g.n_per_axis = j.at("n").get<int>();
    g.box_half_width = j.at("L").get<double>();
    g.spacing = j.at("spacing").get<double>();
    g.cell_volume = j.at("cell_volume").get<double>();
  } catch (const json::exception& e) {
    fail(FormatErrorCode::bad_header, std::string("grid: ") + e.what());
  }
  if (g.n_per_axis <= 0 || g.box_half_width <= 0.0 ||
      std::abs(g.spacing - 2.0 * g.box_half_width / g.n_per_axis) > 1e-12 * g.spacing)
    fail(FormatErrorCode::bad_header, "inconsistent grid description");
  return g;
}

void save_potential(const std::filesystem::path& path, const gridfield::PotentialRealization& V) {
  const auto n = static_cast<std::uint64_t>(V.grid.n_per_axis);
  json meta = {{"kind", "potential"}, {"grid", grid_to_json(V.grid)}, {"m", V.m}, {"seed", V.seed}};
  std::vector<Array> arrays{Array::real("V", {n, n, n}, V.values)};
  if (V.strength) {
    meta["strength"] = {{"preset", gridfield::preset_name(V.strength->preset)},
                        {"amplitude", V.strength->amplitude},
                        {"radius", V.strength->radius},
                        {"sup_bound", V.strength->sup_bound}};
    arrays.push_back(Array::real("h", {n, n, n}, V.strength->values));
  } else {
    meta["strength"] = nullptr;
  }
  write_container(path, meta, arrays);
}

gridfield::PotentialRealization load_potential(const std::filesystem::path& path) {
  Container c = read_container(path);
  gridfield::PotentialRealization V;
  try {
    if (c.meta.at("kind") != "potential") fail(FormatErrorCode::bad_header, "not a potential container");
    V.grid = grid_from_json(c.meta.at("grid"));
    V.m = c.meta.at("m").get<double>();
    V.seed = c.meta.at("seed").get<std::uint64_t>();
    V.values = c.get("V").f64;
    const auto& s = c.meta.at("strength");
    if (!s.is_null()) {
      auto h = std::make_shared<gridfield::StrengthField>();
      h->grid = V.grid;
      h->values = c.get("h").f64;
      h->preset = gridfield::parse_preset(s.at("preset").get<std::string>());
      h->amplitude = s.at("amplitude").get<double>();
      h->radius = s.at("radius").get<double>();
      h->sup_bound = s.at("sup_bound").get<double>();
      V.strength = std::move(h);
    }
  } catch (const json::exception& e) {
    fail(FormatErrorCode::bad_header, e.what());
  }
  if (V.values.size() != V.grid.size()) fail(FormatErrorCode::size_mismatch, "potential size differs from the grid");
  return V;
}

void save_dataset(const std::filesystem::path& path, const FarFieldDataset& ds) {
  std::vector<double> dirs;
  for (auto d : ds.directions) dirs.insert(dirs.end(), {d.x, d.y, d.z});
  json meta = {{"kind", "backscatter"},
               {"grid", grid_to_json(ds.grid)},
               {"m", ds.m},
               {"seed", ds.seed},
               {"tol", ds.tol},
               {"model", ds.model},
               {"max_neumann_estimate", ds.max_neumann_estimate},
               {"max_iterations", ds.max_iterations}};
  const auto nd = static_cast<std::uint64_t>(ds.n_dir()), nf = static_cast<std::uint64_t>(ds.n_freq());
  write_container(path, meta,
                  {Array::real("directions", {nd, 3}, dirs), Array::real("frequencies", {nf}, ds.frequencies),
                   Array::complex("values", {nd, nf}, ds.values)});
}

FarFieldDataset load_dataset(const std::filesystem::path& path) {
  Container c = read_container(path);
  FarFieldDataset ds;
  try {
    if (c.meta.at("kind") != "backscatter") fail(FormatErrorCode::bad_header, "not a backscatter container");
    ds.grid = grid_from_json(c.meta.at("grid"));
    ds.m = c.meta.at("m").get<double>();
    ds.seed = c.meta.at("seed").get<std::uint64_t>();
    ds.tol = c.meta.at("tol").get<double>();
    ds.model = c.meta.at("model").get<std::string>();
    ds.max_neumann_estimate = c.meta.at("max_neumann_estimate").get<double>();
    ds.max_iterations = c.meta.at("max_iterations").get<int>();
  } catch (const json::exception& e) {
    fail(FormatErrorCode::bad_header, e.what());
  }
  const auto& d = c.get("directions").f64;
  for (std::size_t i = 0; i + 2 < d.size(); i += 3) ds.directions.push_back({d[i], d[i + 1], d[i + 2]});
  ds.frequencies = c.get("frequencies").f64;
  ds.values = c.get("values").c128;
  if (ds.values.size() != ds.n_dir() * ds.n_freq()) fail(FormatErrorCode::size_mismatch, "values size differs");
  return ds;
}

void write_ensemble(const std::filesystem::path& dir, const std::vector<FarFieldDataset>& ensemble) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(FormatErrorCode::io_error, "cannot create " + dir.string());
  json files = json::array(), seeds = json::array();
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "dataset_%05zu.ffpk", i);
    save_dataset(dir / name, ensemble[i]);
    files.push_back(name);
    seeds.push_back(ensemble[i].seed);
  }
  json index = {{"kind", "ensemble"}, {"count", ensemble.size()}, {"files", files}, {"seeds", seeds}};
  std::ofstream out(dir / "index.json", std::ios::trunc);
  if (!out) fail(FormatErrorCode::io_error, "cannot write index.json in " + dir.string());
  out << index.dump(2) << '\n';
}

std::vector<FarFieldDataset> read_ensemble(const std::filesystem::path& dir) {
  std::ifstream in(dir / "index.json");
  if (!in) fail(FormatErrorCode::io_error, "missing index.json in " + dir.string());
  json index;
  std::vector<std::string> files;
  try {
    index = json::parse(in);
    files = index.at("files").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(FormatErrorCode::bad_header, std::string("index.json: ") + e.what());
  }
  std::vector<FarFieldDataset> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_dataset(dir / f));
  return out;
}

}  // namespace scatterlab::datastore
