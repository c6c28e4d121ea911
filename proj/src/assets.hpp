#pragma once

#include <map>
#include <string>
#include <string_view>

#include "codesim/error.hpp"

namespace codesim::detail {

const std::map<std::string, std::string_view, std::less<>>& asset_table();

inline std::string_view asset(std::string_view name) {
  const auto& table = asset_table();
  auto it = table.find(name);
  if (it == table.end()) throw Error("missing embedded asset " + std::string(name));
  return it->second;
}

}  // namespace codesim::detail
