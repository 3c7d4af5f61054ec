#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlinv/experiments.hpp"
#include "nlinv/hilbert.hpp"
#include "nlinv/kernels.hpp"
#include "nlinv/operators.hpp"
#include "nlinv/tikhonov.hpp"

namespace nlinv {

using Json = nlohmann::json;

// Shortest round-trip decimal form (printf %.17g).
std::string format_double(double v);

// Strict view of a JSON object: every key must be consumed before finish().
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path);

  bool has(const std::string& key) const;
  const Json& raw(const std::string& key);
  double number(const std::string& key);
  double number_or(const std::string& key, double fallback);
  double positive(const std::string& key);
  long long integer(const std::string& key);
  long long integer_or(const std::string& key, long long fallback);
  bool boolean_or(const std::string& key, bool fallback);
  std::string string(const std::string& key);
  std::string string_or(const std::string& key, const std::string& fallback);
  std::vector<double> numbers(const std::string& key);
  ObjectReader object(const std::string& key);
  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const std::string& path() const { return path_; }
  // Throws ConfigError naming the first unknown key.
  void finish() const;

 private:
  const Json& at(const std::string& key);
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Json kernel_to_json(const Kernel& k);
Kernel kernel_from_json(const Json& j, const std::string& path = "kernel");
Json grid_to_json(const Grid& g);
GridPtr grid_from_json(const Json& j, const std::string& path = "grid");

// CSV with header x,y plus a sidecar JSON (seed, noise metadata) at <csv>.meta.json.
void save_samples(const SampleSet& s, const std::filesystem::path& csv);
SampleSet load_samples(const std::filesystem::path& csv);

// Dense theta table: first row "x,<grid nodes...>" is optional; each data row is eval node then values.
Theta load_theta_csv(const std::filesystem::path& csv, const Grid& grid);


std::string fit_csv_header();
// err_h1 and err_pred are left empty when the truth is unknown.
std::string fit_csv_row(int m, const TikhonovFit& fit, std::optional<double> err_h1, std::optional<double> err_pred);

std::string rate_rows_csv(const RateStudyResult& r);
std::string rate_timings_csv(const RateStudyResult& r);

void write_text(const std::filesystem::path& p, const std::string& text);
std::string read_text(const std::filesystem::path& p);
Json read_json(const std::filesystem::path& p);

}  // namespace nlinv
