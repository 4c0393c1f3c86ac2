#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <cdpta/dsl.hpp>
#include <cdpta/model.hpp>

namespace testsupport {

inline std::string fixture_path(const std::string& name) {
  return std::string(FIXTURE_DIR) + "/" + name;
}

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name), std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline cdpta::Cdpta load_model(const std::string& name) {
  auto r = cdpta::parse(read_fixture(name));
  if (!r.model) throw std::runtime_error("fixture " + name + " does not parse");
  return *r.model;
}

inline cdpta::Cdpta fig1() { return load_model("fig1.cdpta"); }
inline cdpta::Cdpta notinit() { return load_model("notinit.cdpta"); }

}  // namespace testsupport
