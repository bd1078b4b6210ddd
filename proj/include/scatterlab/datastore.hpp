#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "scatterlab/backscatter.hpp"
#include "scatterlab/gridfield.hpp"

namespace scatterlab::datastore {

using json = nlohmann::json;

enum class FormatErrorCode { bad_magic, truncated, checksum_mismatch, size_mismatch, io_error, bad_header };

/// Stable string for each code: "bad_magic", "truncated", ...
std::string code_name(FormatErrorCode code);

class FormatError : public PreconditionError {
 public:
  FormatError(FormatErrorCode code, const std::string& detail);
  FormatErrorCode code() const { return code_; }

 private:
  FormatErrorCode code_;
};

/// One named array: float64 or complex128 (interleaved re, im), row-major.
struct Array {
  std::string name;
  std::vector<std::uint64_t> shape;
  bool is_complex = false;
  std::vector<double> f64;
  std::vector<cdouble> c128;

  static Array real(std::string name, std::vector<std::uint64_t> shape, std::vector<double> data);
  static Array complex(std::string name, std::vector<std::uint64_t> shape, std::vector<cdouble> data);
  std::size_t count() const { return is_complex ? c128.size() : f64.size(); }
};

struct Container {
  json meta;
  std::vector<Array> arrays;
  const Array& get(const std::string& name) const;
};

/// "FFPK" 0x01 | u32 LE header length | JSON header | payload of LE float64.
std::string encode_container(const json& meta, const std::vector<Array>& arrays);
Container decode_container(const std::string& bytes);

void write_container(const std::filesystem::path& path, const json& meta, const std::vector<Array>& arrays);
Container read_container(const std::filesystem::path& path);

std::uint32_t crc32_of(const void* data, std::size_t size);

json grid_to_json(const GridSpec3& grid);
GridSpec3 grid_from_json(const json& j);

void save_potential(const std::filesystem::path& path, const gridfield::PotentialRealization& V);
gridfield::PotentialRealization load_potential(const std::filesystem::path& path);

void save_dataset(const std::filesystem::path& path, const FarFieldDataset& ds);
FarFieldDataset load_dataset(const std::filesystem::path& path);

/// Directory of dataset_NNNNN.ffpk files plus index.json listing them in order.
void write_ensemble(const std::filesystem::path& dir, const std::vector<FarFieldDataset>& ensemble);
std::vector<FarFieldDataset> read_ensemble(const std::filesystem::path& dir);

}  // namespace scatterlab::datastore
