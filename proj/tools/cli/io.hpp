#pragma once

// Shared plumbing for the subcommands: option registration, config echo,
// output sinks and tabular input.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "planarcav/design.hpp"
#include "planarcav/materials.hpp"

namespace planarcav::cli {

using json = nlohmann::ordered_json;

/// Options every subcommand accepts.
struct CommonOptions {
  std::string out;
  std::string config;
  std::string materials_dir;
  std::string sic_index = "ordinary";
  int threads = 0;

  MaterialLibrary library() const;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

using Handler = std::function<void(const Streams&)>;

/// Subcommand name -> handler, filled by the register_* functions.
struct Registry {
  std::map<std::string, std::pair<CLI::App*, Handler>> commands;

  void add(CLI::App* sub, Handler h) { commands[sub->get_name()] = {sub, std::move(h)}; }
};

void add_common_options(CLI::App& sub, CommonOptions& common, bool spec_alias = false);

/// Resolved option values of a subcommand, in declaration order. Bookkeeping
/// options (output paths, config file, thread count) are left out so the echo
/// does not change the result.
/// `include`, when set, further restricts the echo to the names it accepts.
using EchoFilter = std::function<bool(const std::string&)>;
std::vector<std::pair<std::string, std::string>> config_echo(const CLI::App& sub, const EchoFilter& include = {});

/// Reads `key = value` pairs from a config file, a CSV written by this tool
/// (`# key = value` comments) or a JSON output (its "config" object).
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

/// Output file given by --out, or the fallback stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback);
  std::ostream& stream() { return file_ ? *file_ : fallback_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream& fallback_;
};

void write_csv_header(std::ostream& os, const CLI::App& sub, const EchoFilter& include = {});
json config_json(const CLI::App& sub, const EchoFilter& include = {});
void write_json(std::ostream& os, const json& j);

/// Shortest round-trip decimal text.
std::string num(double v);

/// Numeric table: whitespace- or comma-separated columns, `#` comments,
/// non-numeric rows (headers) skipped.
std::vector<std::vector<double>> read_table(const std::filesystem::path& path, std::size_t min_columns);
std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t index);

// ---- stack files and antenna options ----

/// `incidence <material>`, `<material> <thickness_nm>` rows, `exit <material>`.
Stack load_stack(const std::filesystem::path& path, const MaterialLibrary& lib);

struct DesignOptions {
  AntennaDesign design = reference_design();
  std::string orientation = "horizontal";
  double na = 0.9;
  int quad_order = 64;
  std::string reference = "semi_infinite";
  std::string spectrum;  // empty: bundled V2 spectrum
  std::string window = "900:1000:5";

  void add_to(CLI::App& sub, bool with_window = true);
  DesignContext context(const MaterialLibrary& lib, int threads) const;
  AntennaDesign resolved_design() const;
};

CollectionGeometry geometry(double na, int quad_order);

}  // namespace planarcav::cli
