#pragma once

#include <string>

#include "rsdlab/market.hpp"
#include "rsdlab/permutation.hpp"

namespace rsdlab {

// Instance files are one JSON document with fields n, m, capacities and
// preferences (0-based school ids, best first). Permutations serialize as the
// student_at array, assignments as the school_of array with -1 for Unmatched.

MarketInstance instance_from_json(const std::string& text);
std::string instance_to_json(const MarketInstance& inst);
MarketInstance load_instance(const std::string& path);
void save_instance(const MarketInstance& inst, const std::string& path);

Permutation load_permutation(const std::string& path);
void save_permutation(const Permutation& pi, const std::string& path);

void save_assignment(const Assignment& a, const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file_raw(const std::string& path, const std::string& content);

}  // namespace rsdlab
