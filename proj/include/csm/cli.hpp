#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csm/model.hpp"
#include "csm/robustness.hpp"
#include "csm/sampler.hpp"
#include "csm/simulation.hpp"

namespace csm::cli {

/// Flat `key = value` configuration with dotted section names:
///
///   seed = 7
///   [sampler]            # equivalent to prefixing the keys below with "sampler."
///   n_iter = 500
///   prior.gamma = 2
///
/// Every lookup records the value actually used (default or explicit), so the
/// effective configuration can be echoed next to the results.
class Config {
 public:
  static Config parse(std::istream& in);
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& fallback) const;

  /// Keys present in the file that were never looked up.
  std::vector<std::string> unused_keys() const;
  /// Effective configuration, one `key = value` per line, sorted.
  void echo(std::ostream& out) const;

  void set(const std::string& key, const std::string& value) { values_[key] = {value, 0}; }

 private:
  struct Entry {
    std::string value;
    long line;
  };
  const Entry* find(const std::string& key) const;
  [[noreturn]] void bad_value(const std::string& key, const char* what) const;

  std::map<std::string, Entry> values_;
  mutable std::map<std::string, std::string> used_;
};

/// Headered comma-separated table of strings.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<long> lines;  // source line of each row

  std::ptrdiff_t column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);
/// Parses a float cell; throws InputError with the 1-based file line.
double parse_number(const std::string& cell, long line);
std::string format_number(double x);  // 17 significant digits

/// Observation matrix from a `y1,...,yp` headered CSV.
Eigen::MatrixXd read_observations(const std::filesystem::path& path);
/// Long-format designs (columns i, row_k, col_j, value, all indices 1-based).
/// Missing entries are zero; q is the largest col_j.
std::vector<Eigen::MatrixXd> read_designs(const std::filesystem::path& path, Eigen::Index n, Eigen::Index p);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

PriorConfig prior_from(const Config& cfg, Eigen::Index p, Eigen::Index q);
SamplerConfig sampler_from(const Config& cfg);
ScenarioSpec scenario_from(const Config& cfg);

/// Process exit codes.
enum Exit : int {
  ok = 0,
  claim_failed = 1,  // a family expected to converge missed its tolerance
  input_error = 2,
  sampler_error = 3,
  quadrature_error = 4,
};

/// Each command maps library errors onto the exit codes above and logs the cause.
int cmd_fit(const std::filesystem::path& config_path, const std::filesystem::path& data_path,
            const std::optional<std::filesystem::path>& design_path);
int cmd_simulate(const std::filesystem::path& config_path);
int cmd_robustness(const std::filesystem::path& config_path);

}  // namespace csm::cli
