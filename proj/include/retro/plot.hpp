#pragma once

#include <filesystem>
#include <string>

#include "retro/fluctuation.hpp"

namespace retro {

/// Stem plot of the forward atoms (above the axis) and reverse atoms (below) on
/// a shared omega axis, written as plain SVG text. Throws InvalidArgument when
/// both measures are empty (no file is created) and IoError when writing fails.
void emit_plot(const DiscreteMeasure& mu_f, const DiscreteMeasure& mu_r, const std::filesystem::path& path,
               const std::string& title = "");

/// The SVG document emit_plot writes.
std::string render_plot(const DiscreteMeasure& mu_f, const DiscreteMeasure& mu_r, const std::string& title = "");

}  // namespace retro
