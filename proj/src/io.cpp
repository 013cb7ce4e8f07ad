#include "rsdlab/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rsdlab/error.hpp"

namespace rsdlab {

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::FileNotFound, path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_text_file_raw(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::FileNotFound, "cannot open for writing: " + path);
  os << content;
}

MarketInstance instance_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BadConfig, std::string("instance file is not valid JSON: ") + e.what());
  }
  try {
    InstanceData d;
    d.n = j.at("n").get<std::int64_t>();
    d.m = j.at("m").get<std::int64_t>();
    d.capacities = j.at("capacities").get<std::vector<std::int64_t>>();
    d.preferences = j.at("preferences").get<std::vector<std::vector<School>>>();
    return validate_instance(d);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BadConfig, std::string("instance file shape: ") + e.what());
  }
}

std::string instance_to_json(const MarketInstance& inst) {
  nlohmann::ordered_json j;
  j["n"] = inst.n();
  j["m"] = inst.m();
  j["capacities"] = inst.capacities();
  auto prefs = nlohmann::ordered_json::array();
  for (std::int64_t i = 0; i < inst.n(); ++i) {
    auto p = inst.prefs(i);
    prefs.push_back(std::vector<School>(p.begin(), p.end()));
  }
  j["preferences"] = std::move(prefs);
  return j.dump(2) + "\n";
}

MarketInstance load_instance(const std::string& path) {
  return instance_from_json(read_text_file(path));
}

void save_instance(const MarketInstance& inst, const std::string& path) {
  write_text_file_raw(path, instance_to_json(inst));
}

Permutation load_permutation(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
    return Permutation::from_student_at(j.get<std::vector<Student>>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BadConfig, std::string("permutation file shape: ") + e.what());
  }
}

void save_permutation(const Permutation& pi, const std::string& path) {
  nlohmann::json j = pi.student_at;
  write_text_file_raw(path, j.dump() + "\n");
}

void save_assignment(const Assignment& a, const std::string& path) {
  nlohmann::json j = a.school_of;
  write_text_file_raw(path, j.dump() + "\n");
}

}  // namespace rsdlab
