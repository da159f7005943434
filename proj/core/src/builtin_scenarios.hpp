#pragma once

#include <string_view>
#include <vector>

namespace phmbd::builtin {

struct Entry {
  std::string_view name;
  std::string_view text;
};

const std::vector<Entry>& scenarios();

}  // namespace phmbd::builtin
