#pragma once

// Subcommand dispatch: each run reads a RunConfig, writes its CSV outputs into
// one directory and finishes with manifest.yaml, the fully resolved config.
// Running again from that manifest reproduces the same files byte for byte.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "snail/config.hpp"
#include "snail/quantum.hpp"

namespace snail {

const std::vector<std::string>& subcommands();

/// Run one subcommand. Returns the files written, manifest last.
std::vector<std::filesystem::path> run(const std::string& subcommand, const RunConfig& cfg,
                                       const std::filesystem::path& out_dir, std::ostream& log);

/// First row: Re axis (corner cell "im\re"); first column: Im axis.
void write_wigner_csv(const std::filesystem::path& path, const WignerMap& map);
/// Real and imaginary parts as two headerless square CSVs.
void write_state_csv(const std::filesystem::path& re_path, const std::filesystem::path& im_path,
                     const DensityMatrix& rho);
DensityMatrix read_state_csv(const std::filesystem::path& re_path, const std::filesystem::path& im_path);

}  // namespace snail
