#include "cli/app.hpp"

#include <algorithm>
#include <ostream>

#include "cli/commands.hpp"
#include "cli/io.hpp"
#include "planarcav/errors.hpp"

namespace planarcav::cli {
namespace {

struct UsageError : ConfigError {
  using ConfigError::ConfigError;
  const char* kind() const noexcept override { return "usage"; }
};

void error_record(std::ostream& err, const std::string& command, const std::string& kind, const std::string& message,
                  int code) {
  json rec;
  rec["status"] = "error";
  rec["command"] = command;
  rec["kind"] = kind;
  rec["message"] = message;
  rec["exit_code"] = code;
  err << rec.dump() << "\n";
}

bool user_sets(const std::vector<std::string>& args, const CLI::Option* opt) {
  for (const auto& name : opt->get_lnames()) {
    const std::string flag = "--" + name;
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (args[i] == flag || args[i].starts_with(flag + "=")) return true;
    }
  }
  for (const auto& name : opt->get_snames()) {
    const std::string flag = "-" + name;
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (args[i] == flag) return true;
    }
  }
  return false;
}

std::string config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    for (const std::string flag : {"--config", "--spec"}) {
      if (args[i] == flag && i + 1 < args.size()) return args[i + 1];
      if (args[i].starts_with(flag + "=")) return args[i].substr(flag.size() + 1);
    }
  }
  return {};
}

/// Inserts `--key=value` tokens from the config file right after the
/// subcommand name. Options given explicitly on the command line win.
std::vector<std::string> inject_config(const std::vector<std::string>& args, CLI::App& sub) {
  const std::string path = config_path(args);
  if (path.empty()) return args;
  std::vector<std::string> injected;
  for (const auto& [key, value] : read_config_file(path)) {
    if (key == "command") {
      if (value != sub.get_name()) {
        throw UsageError("config file '" + path + "' was written by '" + value + "', not '" + sub.get_name() + "'");
      }
      continue;
    }
    const CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (opt == nullptr) throw UsageError("config file '" + path + "': unknown key '" + key + "'");
    const auto& lnames = opt->get_lnames();
    if (std::find(lnames.begin(), lnames.end(), "config") != lnames.end()) continue;
    if (user_sets(args, opt)) continue;
    // a positional value on the command line also counts as explicit
    if (opt->get_positional() && args.size() > 1 && !args[1].starts_with("-")) continue;
    injected.push_back("--" + key + "=" + value);
  }
  std::vector<std::string> out;
  out.reserve(args.size() + injected.size());
  out.push_back(args.front());
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Planar SiC/Ag antenna design and emitter characterization toolkit", "planarcav"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", "planarcav 0.3.0");

  Registry reg;
  register_optics(app, reg);
  register_fit(app, reg);
  register_ple(app, reg);
  register_synth(app, reg);

  const std::string command = args.empty() ? std::string() : args.front();
  std::vector<std::string> argv = args;
  try {
    if (auto it = reg.commands.find(command); it != reg.commands.end()) argv = inject_config(args, *it->second.first);
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    error_record(err, command, "usage", e.what(), 2);
    return 2;
  } catch (const Error& e) {
    error_record(err, command, e.kind(), e.what(), 2);
    return 2;
  }

  for (const auto& [name, entry] : reg.commands) {
    if (!entry.first->parsed()) continue;
    try {
      entry.second(Streams{out, err});
      return 0;
    } catch (const ConfigError& e) {
      error_record(err, name, e.kind(), e.what(), 2);
      return 2;
    } catch (const Error& e) {
      error_record(err, name, e.kind(), e.what(), 1);
      return 1;
    } catch (const std::exception& e) {
      error_record(err, name, "internal", e.what(), 1);
      return 1;
    }
  }
  error_record(err, command, "usage", "no subcommand given", 2);
  return 2;
}

}  // namespace planarcav::cli
