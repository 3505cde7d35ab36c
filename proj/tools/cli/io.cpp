#include "cli/io.hpp"

#include <fmt/format.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "planarcav/errors.hpp"

namespace planarcav::cli {
namespace {

const std::vector<std::string> kBookkeeping = {"out", "config", "spec", "threads", "help", "out-lines", "out-dir"};

bool is_bookkeeping(const std::string& name) {
  return std::find(kBookkeeping.begin(), kBookkeeping.end(), name) != kBookkeeping.end();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::string long_name(const CLI::Option* opt) {
  const auto& names = opt->get_lnames();
  return names.empty() ? opt->get_name(false, false) : names.front();
}

}  // namespace

MaterialLibrary CommonOptions::library() const {
  SicIndexModel model = SicIndexModel::ordinary;
  if (sic_index == "extraordinary") model = SicIndexModel::extraordinary;
  else if (sic_index != "ordinary") throw ConfigError("sic-index must be ordinary or extraordinary");
  if (!materials_dir.empty()) return MaterialLibrary::from_directory(materials_dir, model);
  return MaterialLibrary::bundled(model);
}

void add_common_options(CLI::App& sub, CommonOptions& common, bool spec_alias) {
  sub.add_option("--out", common.out, "Output file (default: standard output)");
  sub.add_option(spec_alias ? "--config,--spec" : "--config", common.config,
                 "key = value file, or an earlier output of this tool, supplying option values");
  sub.add_option("--materials-dir", common.materials_dir,
                 "Directory of <name>.txt index tables (default: $PLANARCAV_MATERIALS_DIR or bundled data)");
  sub.add_option("--sic-index", common.sic_index, "Principal index backing 'sic'")
      ->check(CLI::IsMember({"ordinary", "extraordinary"}));
  sub.add_option("--threads", common.threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
}

std::vector<std::pair<std::string, std::string>> config_echo(const CLI::App& sub, const EchoFilter& include) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = long_name(opt);
    if (name.empty() || is_bookkeeping(name)) continue;
    if (include && !include(name)) continue;
    if (opt->count() > 0) {
      for (const auto& v : opt->results()) out.emplace_back(name, v);
      continue;
    }
    const std::string d = opt->get_default_str();
    if (d.empty()) continue;
    if (d.size() >= 2 && d.front() == '[' && d.back() == ']') {
      // vector default: one entry per element
      std::stringstream items(d.substr(1, d.size() - 2));
      std::string item;
      while (std::getline(items, item, ',')) out.emplace_back(name, trim(item));
    } else {
      out.emplace_back(name, d);
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  std::vector<std::pair<std::string, std::string>> out;
  if (trim(text).starts_with("{")) {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    if (!j.contains("config") || !j["config"].is_object()) {
      throw ParseError(path.string() + ": JSON input has no \"config\" object");
    }
    for (const auto& [key, value] : j["config"].items()) {
      if (value.is_array()) {
        for (const auto& v : value) out.emplace_back(key, v.get<std::string>());
      } else {
        out.emplace_back(key, value.get<std::string>());
      }
    }
    return out;
  }
  std::istringstream lines(text);
  std::string raw;
  while (std::getline(lines, raw)) {
    std::string line = trim(raw);
    if (line.starts_with("#")) line = trim(line.substr(1));
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(line.substr(0, eq));
    if (key.empty() || key.find_first_of(" \t,") != std::string::npos) continue;
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

Sink::Sink(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
  if (!path.empty()) {
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw ConfigError("cannot write output file '" + path + "'");
  }
}

void write_csv_header(std::ostream& os, const CLI::App& sub, const EchoFilter& include) {
  os << "# command = " << sub.get_name() << "\n";
  for (const auto& [k, v] : config_echo(sub, include)) os << "# " << k << " = " << v << "\n";
}

json config_json(const CLI::App& sub, const EchoFilter& include) {
  json cfg = json::object();
  for (const auto& [k, v] : config_echo(sub, include)) {
    if (!cfg.contains(k)) {
      cfg[k] = v;
    } else {
      if (!cfg[k].is_array()) cfg[k] = json::array({cfg[k]});
      cfg[k].push_back(v);
    }
  }
  return cfg;
}

void write_json(std::ostream& os, const json& j) { os << j.dump(2) << "\n"; }

std::string num(double v) { return fmt::format("{}", v); }

std::vector<std::vector<double>> read_table(const std::filesystem::path& path, std::size_t min_columns) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file '" + path.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    for (char& c : raw) {
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    }
    std::istringstream row(raw);
    std::vector<double> values;
    std::string token;
    bool numeric = true;
    while (row >> token) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(token, &used));
        if (used != token.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (values.empty() && numeric) continue;
    if (!numeric) {
      if (rows.empty()) continue;  // header row
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": non-numeric value");
    }
    if (values.size() < min_columns) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected at least " +
                       std::to_string(min_columns) + " columns");
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw InsufficientData(path.string() + ": no data rows");
  return rows;
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t index) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (index >= r.size()) throw ParseError("missing column " + std::to_string(index + 1));
    out.push_back(r[index]);
  }
  return out;
}

Stack load_stack(const std::filesystem::path& path, const MaterialLibrary& lib) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open stack file '" + path.string() + "'");
  Stack stack;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream row(raw);
    std::string first, second, extra;
    if (!(row >> first)) continue;
    if (!(row >> second) || (row >> extra)) throw ParseError(where + ": expected two fields");
    if (first == "incidence") {
      stack.incidence = lib.get(second);
    } else if (first == "exit") {
      stack.exit = lib.get(second);
    } else {
      double d = 0.0;
      try {
        std::size_t used = 0;
        d = std::stod(second, &used);
        if (used != second.size()) throw std::invalid_argument(second);
      } catch (const std::exception&) {
        throw ParseError(where + ": thickness '" + second + "' is not a number");
      }
      stack.layers.push_back({lib.get(first), d});
    }
  }
  if (!stack.incidence || !stack.exit) throw ParseError(path.string() + ": needs 'incidence' and 'exit' lines");
  stack.validate();
  return stack;
}

void DesignOptions::add_to(CLI::App& sub, bool with_window) {
  sub.add_option("--silica-nm", design.silica_nm, "SiO2 capping thickness (0 omits the layer)");
  sub.add_option("--upper-ag-nm", design.upper_silver_nm, "Thin upper silver thickness");
  sub.add_option("--sic-nm", design.sic_nm, "SiC membrane thickness");
  sub.add_option("--dipole-pos-rel", design.dipole_rel_pos, "Dipole position in the membrane (0: thick-silver side)")
      ->check(CLI::Range(0.0, 1.0));
  sub.add_option("--lower-ag-nm", design.lower_silver_nm, "Thick lower silver thickness");
  sub.add_option("--orientation", orientation, "Dipole orientation")
      ->check(CLI::IsMember({"horizontal", "vertical"}));
  sub.add_option("--na", na, "Numerical aperture of the collection objective");
  sub.add_option("--quad-order", quad_order, "Gauss-Legendre order of the angular integral");
  sub.add_option("--reference", reference, "Bulk reference geometry")
      ->check(CLI::IsMember({"semi_infinite", "homogeneous"}));
  sub.add_option("--spectrum", spectrum, "Emitter spectrum file (default: bundled V2 spectrum)");
  if (with_window) sub.add_option("--window", window, "Spectral window min:max[:step] in nm");
}

CollectionGeometry geometry(double na, int quad_order) {
  CollectionGeometry g;
  g.numerical_aperture = na;
  g.quadrature_order = quad_order;
  g.validate();
  return g;
}

AntennaDesign DesignOptions::resolved_design() const {
  AntennaDesign d = design;
  d.orientation = parse_orientation(orientation);
  return d;
}

DesignContext DesignOptions::context(const MaterialLibrary& lib, int threads) const {
  DesignContext ctx(AntennaMaterials::from(lib), spectrum.empty() ? bundled_v2_spectrum() : load_spectrum(spectrum));
  ctx.window = SpectralWindow::parse(window);
  ctx.geom = geometry(na, quad_order);
  ctx.options.reference = parse_reference_model(reference);
  ctx.threads = threads;
  return ctx;
}

}  // namespace planarcav::cli
