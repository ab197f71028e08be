#include <algorithm>
#include <filesystem>
#include <map>
#include <mutex>

#include "ocv2/layout.hpp"

namespace ocv2 {

namespace {

struct Entry {
  const char* name;
  const char* text;
};

constexpr Entry kBuiltins[] = {
#include "builtin_layouts.inc"
};

struct Registry {
  std::vector<std::string> names;
  std::map<std::string, LayoutPtr, std::less<>> layouts;

  Registry() {
    for (const Entry& e : kBuiltins) {
      names.emplace_back(e.name);
      layouts.emplace(e.name, std::make_shared<const Layout>(parse_layout(e.text, e.name)));
    }
  }
};

const Registry& registry() {
  static const Registry r;
  return r;
}

std::string joined_names() {
  std::string out;
  for (const auto& n : registry().names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

}  // namespace

const std::vector<std::string>& builtin_names() { return registry().names; }

LayoutPtr builtin_ptr(std::string_view name) {
  const auto& layouts = registry().layouts;
  const auto it = layouts.find(name);
  if (it == layouts.end()) {
    throw InvalidArgument("unknown layout '" + std::string(name) + "'; available: " + joined_names());
  }
  return it->second;
}

const Layout& builtin(std::string_view name) { return *builtin_ptr(name); }

LayoutPtr resolve_layout(std::string_view name_or_path) {
  const auto& layouts = registry().layouts;
  if (layouts.find(name_or_path) != layouts.end()) return builtin_ptr(name_or_path);
  const std::filesystem::path p{std::string(name_or_path)};
  if (std::filesystem::exists(p)) return std::make_shared<const Layout>(load_layout_file(p.string()));
  return builtin_ptr(name_or_path);
}

}  // namespace ocv2
