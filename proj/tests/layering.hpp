#pragma once

// Include-closure scanner for the self-sufficiency rules: each block's
// headers (and each block's standalone test suite) may only reach its own
// module and the core entity model. Used by the conformance suite and the
// acceptance runner.

#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <string>
#include <vector>

namespace testutil {

inline std::vector<std::string> direct_includes(const std::filesystem::path& file) {
  std::vector<std::string> out;
  std::ifstream in(file);
  std::string line;
  static const std::regex re(R"(^\s*#\s*include\s*[<"]([^">]+)[">])");
  while (std::getline(in, line)) {
    std::smatch m;
    if (std::regex_search(line, m, re)) out.push_back(m[1].str());
  }
  return out;
}

// Transitive closure over project headers (paths relative to include/).
inline std::set<std::string> include_closure(const std::filesystem::path& source_root,
                                             const std::filesystem::path& start_file) {
  std::set<std::string> closure;
  std::vector<std::filesystem::path> queue = {start_file};
  std::set<std::string> visited;
  while (!queue.empty()) {
    std::filesystem::path file = queue.back();
    queue.pop_back();
    if (!visited.insert(file.string()).second) continue;
    for (const auto& inc : direct_includes(file)) {
      if (inc.rfind("blockflow/", 0) == 0) {
        closure.insert(inc);
        queue.push_back(source_root / "include" / inc);
      } else if (inc.size() > 4 && inc.substr(inc.size() - 4) == ".hpp" &&
                 std::filesystem::exists(file.parent_path() / inc)) {
        queue.push_back(file.parent_path() / inc);  // local test helper
      }
    }
  }
  return closure;
}

// Headers in `module` that the closure is allowed to touch besides core.
inline std::string layering_violation(const std::set<std::string>& closure,
                                      const std::set<std::string>& allowed_modules) {
  for (const auto& header : closure) {
    std::string module = header.substr(std::string("blockflow/").size());
    module = module.substr(0, module.find('/'));
    if (module == "core") continue;
    if (!allowed_modules.count(module)) return header;
    // the resource-backed connector is the one pilot header allowed to see
    // the resource layer; nothing that must stay resource-free may pull it
    if (header == "blockflow/pilot/saga_connector.hpp" &&
        !allowed_modules.count("resource"))
      return header;
  }
  return {};
}

}  // namespace testutil
