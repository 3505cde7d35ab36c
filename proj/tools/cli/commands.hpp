#pragma once

#include "cli/io.hpp"

namespace planarcav::cli {

void register_optics(CLI::App& app, Registry& reg);
void register_fit(CLI::App& app, Registry& reg);
void register_ple(CLI::App& app, Registry& reg);
void register_synth(CLI::App& app, Registry& reg);

}  // namespace planarcav::cli
