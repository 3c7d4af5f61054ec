#include "nlinv/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nlinv/errors.hpp"

namespace nlinv {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ObjectReader::ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) throw ConfigError((path_.empty() ? std::string("config") : path_) + ": expected an object");
}

bool ObjectReader::has(const std::string& key) const { return j_.contains(key); }

const Json& ObjectReader::at(const std::string& key) {
  if (!j_.contains(key)) throw ConfigError(key_path(key) + ": missing required key");
  seen_.insert(key);
  return j_.at(key);
}

const Json& ObjectReader::raw(const std::string& key) { return at(key); }

double ObjectReader::number(const std::string& key) {
  const Json& v = at(key);
  if (!v.is_number()) throw ConfigError(key_path(key) + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(key_path(key) + ": must be finite");
  return d;
}

double ObjectReader::number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

double ObjectReader::positive(const std::string& key) {
  const double d = number(key);
  if (!(d > 0.0)) throw ConfigError(key_path(key) + ": must be positive (got " + format_double(d) + ")");
  return d;
}

long long ObjectReader::integer(const std::string& key) {
  const Json& v = at(key);
  if (!v.is_number_integer()) throw ConfigError(key_path(key) + ": expected an integer");
  return v.get<long long>();
}

long long ObjectReader::integer_or(const std::string& key, long long fallback) {
  return has(key) ? integer(key) : fallback;
}

bool ObjectReader::boolean_or(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const Json& v = at(key);
  if (!v.is_boolean()) throw ConfigError(key_path(key) + ": expected true or false");
  return v.get<bool>();
}

std::string ObjectReader::string(const std::string& key) {
  const Json& v = at(key);
  if (!v.is_string()) throw ConfigError(key_path(key) + ": expected a string");
  return v.get<std::string>();
}

std::string ObjectReader::string_or(const std::string& key, const std::string& fallback) {
  return has(key) ? string(key) : fallback;
}

std::vector<double> ObjectReader::numbers(const std::string& key) {
  const Json& v = at(key);
  if (!v.is_array()) throw ConfigError(key_path(key) + ": expected an array of numbers");
  std::vector<double> out;
  for (const Json& e : v) {
    if (!e.is_number()) throw ConfigError(key_path(key) + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

ObjectReader ObjectReader::object(const std::string& key) { return ObjectReader(at(key), key_path(key)); }

void ObjectReader::finish() const {
  for (auto it = j_.begin(); it != j_.end(); ++it)
    if (!seen_.count(it.key())) throw ConfigError(key_path(it.key()) + ": unknown key");
}

Json kernel_to_json(const Kernel& k) {
  Json params = Json::object();
  switch (k.family()) {
    case KernelFamily::gaussian:
      params["lengthscale"] = k.lengthscale();
      break;
    case KernelFamily::sobolev1d:
      params["order"] = k.order();
      break;
    case KernelFamily::matern:
      params["nu"] = k.nu();
      params["lengthscale"] = k.lengthscale();
      break;
  }
  return Json{{"family", to_string(k.family())}, {"params", params}, {"domain", {k.domain().a, k.domain().b}}};
}

Kernel kernel_from_json(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  const std::string fam = r.string("family");
  Interval dom{0.0, 1.0};
  if (r.has("domain")) {
    const auto d = r.numbers("domain");
    if (d.size() != 2 || !(d[0] < d[1])) throw ConfigError(r.key_path("domain") + ": expected [a, b] with a < b");
    dom = {d[0], d[1]};
  }
  Json empty = Json::object();
  ObjectReader p(r.has("params") ? r.raw("params") : empty, r.key_path("params"));
  Kernel k = [&] {
    if (fam == "gaussian") return Kernel::gaussian(p.positive("lengthscale"), dom);
    if (fam == "sobolev1d") {
      const long long order = p.integer_or("order", 1);
      if (order < 1) throw ConfigError(p.key_path("order") + ": must be a positive integer");
      return Kernel::sobolev1d(static_cast<int>(order), dom);
    }
    if (fam == "matern") {
      const double nu = p.positive("nu");
      return Kernel::matern(nu, p.positive("lengthscale"), dom);
    }
    throw ConfigError(r.key_path("family") + ": unknown kernel family '" + fam + "'");
  }();
  p.finish();
  r.finish();
  return k;
}

Json grid_to_json(const Grid& g) {
  return Json{{"a", g.domain.a}, {"b", g.domain.b}, {"n", g.size()}, {"rule", g.rule}, {"normalize", g.normalized}};
}

GridPtr grid_from_json(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  const double a = r.number_or("a", 0.0);
  const double b = r.number_or("b", 1.0);
  const long long n = r.integer_or("n", 128);
  const std::string rule = r.string_or("rule", "trapezoid");
  const bool normalize = r.boolean_or("normalize", false);
  r.finish();
  if (rule != "trapezoid") throw ConfigError(r.key_path("rule") + ": only 'trapezoid' is supported");
  if (!(a < b)) throw ConfigError(path + ": need a < b");
  if (n < 2 || n > 4096) throw ConfigError(r.key_path("n") + ": must lie in [2, 4096]");
  return make_trapezoid_grid({a, b}, static_cast<int>(n), normalize);
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + p.string());
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json read_json(const std::filesystem::path& p) {
  try {
    return Json::parse(read_text(p));
  } catch (const Json::parse_error& e) {
    throw ConfigError(p.string() + ": invalid JSON (" + e.what() + ")");
  }
}

namespace {

std::filesystem::path meta_path(const std::filesystem::path& csv) {
  std::filesystem::path m = csv;
  m += ".meta.json";
  return m;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() && s.find_first_not_of(" \r\t", pos) != std::string::npos) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": cannot parse '" + s + "' as a number");
  }
}

}  // namespace

void save_samples(const SampleSet& s, const std::filesystem::path& csv) {
  s.validate();
  std::string text = "x,y\n";
  for (std::size_t i = 0; i < s.m(); ++i) text += format_double(s.x[i]) + "," + format_double(s.y[i]) + "\n";
  write_text(csv, text);
  const Json meta{{"seed", s.seed},
                  {"m", s.m()},
                  {"noise_meta",
                   {{"model", to_string(s.noise.model)},
                    {"sigma", s.noise.sigma},
                    {"M", s.noise.M},
                    {"Sigma_bernstein", s.noise.Sigma_bernstein}}}};
  write_text(meta_path(csv), meta.dump(2) + "\n");
}

SampleSet load_samples(const std::filesystem::path& csv) {
  std::istringstream in(read_text(csv));
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(csv.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y") throw ConfigError(csv.string() + ": expected header 'x,y'");
  SampleSet s;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    const std::string where = csv.string() + ":" + std::to_string(row);
    if (f.size() != 2) throw ConfigError(where + ": expected two columns");
    s.x.push_back(parse_double(f[0], where));
    s.y.push_back(parse_double(f[1], where));
  }
  const auto mp = meta_path(csv);
  if (std::filesystem::exists(mp)) {
    const Json meta = read_json(mp);
    ObjectReader r(meta, "meta");
    s.seed = static_cast<std::uint64_t>(r.integer_or("seed", 0));
    if (r.has("m") && static_cast<std::size_t>(r.integer("m")) != s.m())
      throw ConfigError(mp.string() + ": m does not match the CSV");
    if (r.has("noise_meta")) {
      ObjectReader nm = r.object("noise_meta");
      s.noise.model = noise_model_from_string(nm.string_or("model", "gaussian"));
      s.noise.sigma = nm.number_or("sigma", 0.0);
      s.noise.M = nm.number_or("M", 3.0 * s.noise.sigma);
      s.noise.Sigma_bernstein = nm.number_or("Sigma_bernstein", 2.0 * s.noise.sigma);
      nm.finish();
    }
    r.finish();
  }
  s.validate();
  return s;
}

Theta load_theta_csv(const std::filesystem::path& csv, const Grid& grid) {
  std::istringstream in(read_text(csv));
  std::string line;
  std::vector<double> nodes;
  std::vector<std::vector<double>> rows;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (row == 1 && !f.empty() && f[0] == "x") continue;  // header
    const std::string where = csv.string() + ":" + std::to_string(row);
    if (static_cast<Eigen::Index>(f.size()) != grid.size() + 1)
      throw ConfigError(where + ": expected the evaluation node and one value per grid node");
    nodes.push_back(parse_double(f[0], where));
    std::vector<double> v;
    for (std::size_t k = 1; k < f.size(); ++k) v.push_back(parse_double(f[k], where));
    rows.push_back(std::move(v));
  }
  if (rows.empty()) throw ConfigError(csv.string() + ": no theta rows");
  Vector ev(static_cast<Eigen::Index>(nodes.size()));
  Matrix tab(static_cast<Eigen::Index>(rows.size()), grid.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ev(i) = nodes[i];
    for (Eigen::Index j = 0; j < grid.size(); ++j) tab(i, j) = rows[i][j];
  }
  return Theta::table(std::move(ev), std::move(tab));
}

std::string fit_csv_header() { return "m,lambda,gn_iters,converged,residual_norm,h1_penalty,err_h1,err_pred\n"; }

std::string fit_csv_row(int m, const TikhonovFit& fit, std::optional<double> err_h1, std::optional<double> err_pred) {
  return std::to_string(m) + "," + format_double(fit.lambda) + "," + std::to_string(fit.gn_iters) + "," +
         (fit.converged ? "true" : "false") + "," + format_double(fit.residual_norm) + "," +
         format_double(fit.h1_penalty) + "," + (err_h1 ? format_double(*err_h1) : "") + "," +
         (err_pred ? format_double(*err_pred) : "") + "\n";
}

std::string rate_rows_csv(const RateStudyResult& r) {
  std::string out = "m,replicate,seed,lambda,err_h1,err_pred,converged,gn_iters,condition_held\n";
  for (const auto& row : r.rows) {
    out += std::to_string(row.m) + "," + std::to_string(row.replicate) + "," + std::to_string(row.seed) + "," +
           format_double(row.lambda) + "," + format_double(row.err_h1) + "," + format_double(row.err_pred) + "," +
           (row.converged ? "true" : "false") + "," + std::to_string(row.gn_iters) + "," +
           (row.condition_held ? "true" : "false") + "\n";
  }
  return out;
}

std::string rate_timings_csv(const RateStudyResult& r) {
  std::string out = "m,replicate,seconds\n";
  for (const auto& row : r.rows)
    out += std::to_string(row.m) + "," + std::to_string(row.replicate) + "," + format_double(row.seconds) + "\n";
  return out;
}

}  // namespace nlinv
