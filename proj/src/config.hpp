#ifndef KTWAVE_CONFIG_HPP
#define KTWAVE_CONFIG_HPP

#include <iosfwd>
#include <string>

#include "sim.hpp"

namespace ktwave {

// Parse a flat `key = value` configuration (# starts a comment). Unknown
// keys are errors. Parsing starts from `base`, so scenario presets can be
// overridden selectively.
SimConfig parse_config(std::istream& in, SimConfig base = {});
SimConfig parse_config_file(const std::string& path, SimConfig base = {});

// Apply a single key = value assignment.
void apply_config_entry(SimConfig& cfg, const std::string& key, const std::string& value);

// Serialize every setting as `# key = value` lines; written at the top of
// each output file so a run is reproducible from its own header.
std::string config_echo(const SimConfig& cfg);

}  // namespace ktwave

#endif
