#pragma once

#include <string_view>
#include <vector>

namespace commerce::detail {

struct EmbeddedResource {
  std::string_view path;  // relative to core/, e.g. "templates/stage1.hyde.txt"
  std::string_view body;
};

const std::vector<EmbeddedResource>& embedded_resources();

}  // namespace commerce::detail
