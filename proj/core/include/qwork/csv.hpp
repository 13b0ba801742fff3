#pragma once

#include <iosfwd>
#include <string>

#include "qwork/distributions.hpp"

namespace qwork {

// Emits "w,p,Q" rows: bin position, weight, cumulative weight. 12 significant
// digits, LF line endings.
void write_distribution_csv(std::ostream& os, const WorkDistribution& dist);
void write_distribution_csv(const std::string& path, const WorkDistribution& dist);

}  // namespace qwork
