#pragma once

#include "spectral/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace spectral {

/**
 * Line-oriented text format, version 1:
 *
 *     spectral-model 1
 *     germ xi_L normal 0 0.1075
 *     germ xi_S uniform -1 1 unused
 *     var bid first 24
 *     var soc second 24
 *     eq balance[0] : 1*soc[0] -1*bid[0] 0.5*xi_L
 *     le cap[0] eps=0.05 : 1*soc[0] -4
 *     objective : 30*bid[0] 4.28*xi_L*bid[0]
 *     end
 *
 * A term is `coef[*germ][*variable]`; a term without factors is a constant.
 * Numbers use the shortest representation that parses back to the same double,
 * so write -> read -> write reproduces the file byte for byte. Lines starting
 * with '#' are comments. Reading returns a finalized model.
 */
void write_model(std::ostream& out, const StochModel& model);
std::string write_model(const StochModel& model);
StochModel read_model(std::istream& in);
StochModel read_model_string(const std::string& text);

void save_model(const std::filesystem::path& path, const StochModel& model);
StochModel load_model(const std::filesystem::path& path);

} // namespace spectral
