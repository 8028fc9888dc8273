#include "websynth/page.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <numeric>

#include "websynth/util.hpp"

namespace websynth {

namespace {

constexpr std::array<std::string_view, 14> kInteractiveRoles = {
    "button", "link",     "checkbox", "radio",  "tab",     "menuitem", "switch",
    "textbox", "searchbox", "combobox", "option", "slider", "listbox",  "select"};

bool is_interactive_role(std::string_view role) {
  return std::find(kInteractiveRoles.begin(), kInteractiveRoles.end(), role) !=
         kInteractiveRoles.end();
}

bool style_hides(const html::Node& n) {
  auto* style = n.attr("style");
  if (style == nullptr) return false;
  std::string compact;
  for (char c : to_lower(*style)) {
    if (c != ' ' && c != '\t' && c != '\n') compact.push_back(c);
  }
  return compact.find("display:none") != std::string::npos ||
         compact.find("visibility:hidden") != std::string::npos;
}

bool is_hidden(const html::Node& n) {
  if (n.has_attr("hidden") || style_hides(n)) return true;
  if (auto* aria = n.attr("aria-hidden"); aria && iequals(trim(*aria), "true")) return true;
  if (n.is_element("input")) {
    if (auto* type = n.attr("type"); type && iequals(trim(*type), "hidden")) return true;
  }
  return n.tag == "head" || n.tag == "script" || n.tag == "style" || n.tag == "template" ||
         n.tag == "noscript";
}

std::string input_role(const html::Node& n) {
  std::string type = "text";
  if (auto* t = n.attr("type")) type = to_lower(trim(*t));
  if (type == "checkbox") return "checkbox";
  if (type == "radio") return "radio";
  if (type == "submit" || type == "button" || type == "reset" || type == "image") return "button";
  if (type == "range") return "slider";
  return "textbox";
}

// Native role for interactive tags; empty when the tag is not interactive.
std::string native_role(const html::Node& n) {
  if (n.tag == "a") return n.has_attr("href") ? "link" : "";
  if (n.tag == "button") return "button";
  if (n.tag == "input") return input_role(n);
  if (n.tag == "select") return "select";
  if (n.tag == "textarea") return "textbox";
  return "";
}

std::optional<BBox> parse_bbox(const html::Node& n) {
  auto* raw = n.attr("data-bbox");
  if (raw == nullptr) return std::nullopt;
  std::array<int, 4> v{};
  std::string_view s = *raw;
  for (int i = 0; i < 4; ++i) {
    s = trim(s);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v[i]);
    if (ec != std::errc{}) return std::nullopt;
    s = s.substr(static_cast<std::size_t>(ptr - s.data()));
    s = trim(s);
    if (i < 3) {
      if (s.empty() || s.front() != ',') return std::nullopt;
      s.remove_prefix(1);
    }
  }
  if (!trim(s).empty() || v[2] < 0 || v[3] < 0) return std::nullopt;
  return BBox{v[0], v[1], v[2], v[3]};
}

std::string attr_text(const html::Node& n, std::string_view name) {
  auto* v = n.attr(name);
  return v ? collapse_whitespace(*v) : std::string{};
}

std::vector<const html::Node*> option_nodes(const html::Node& select) {
  std::vector<const html::Node*> out;
  std::vector<const html::Node*> pending{&select};
  while (!pending.empty()) {
    const auto* n = pending.back();
    pending.pop_back();
    if (n->is_element("option")) {
      out.push_back(n);
      continue;
    }
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) pending.push_back(it->get());
  }
  return out;
}

std::string select_value(const html::Node& select) {
  auto options = option_nodes(select);
  for (const auto* o : options) {
    if (o->has_attr("selected")) return html::text_content(*o);
  }
  return options.empty() ? std::string{} : html::text_content(*options.front());
}

std::string accessible_name(const html::Node& n) {
  if (auto s = attr_text(n, "aria-label"); !s.empty()) return s;
  if (auto s = attr_text(n, "alt"); !s.empty()) return s;
  if (n.is_element("select")) {
    if (auto s = select_value(n); !s.empty()) return s;
  } else if (n.is_element("input") || n.is_element("button")) {
    if (auto s = attr_text(n, "value"); !s.empty()) return s;
  }
  if (auto s = html::text_content(n); !s.empty()) return s;
  if (auto s = attr_text(n, "placeholder"); !s.empty()) return s;
  return attr_text(n, "title");
}

struct Walker {
  Viewport viewport;
  int scroll_y;
  std::vector<ElementNode> out;
  int fallback_slot = 0;

  // Boxes for elements without data-bbox: a single column of 32 px rows at a
  // 40 px pitch, width proportional to the name length.
  BBox fallback_box(const std::string& name) {
    int w = std::min(std::max(viewport.width - 16, 1),
                     16 + 8 * static_cast<int>(std::max<std::size_t>(name.size(), 1)));
    BBox b{8, 8 + 40 * fallback_slot, w, 32};
    ++fallback_slot;
    return b;
  }

  void emit(const html::Node& n, std::string role, bool interactable) {
    ElementNode e;
    e.index = ElementId{static_cast<std::uint32_t>(out.size())};
    e.role = std::move(role);
    e.name = accessible_name(n);
    e.interactable = interactable && !n.has_attr("disabled");
    if (n.is_element("select")) {
      for (const auto* o : option_nodes(n)) e.options.push_back(html::text_content(*o));
    }
    if (auto box = parse_bbox(n)) {
      e.bbox = *box;
    } else {
      e.bbox = fallback_box(e.name);
    }
    const int top = scroll_y;
    const int bottom = scroll_y + viewport.height;
    e.in_viewport = e.bbox.area() > 0 && e.bbox.x < viewport.width && e.bbox.x + e.bbox.w > 0 &&
                    e.bbox.y < bottom && e.bbox.y + e.bbox.h > top;
    e.source_ref = html::locator_of(n);
    out.push_back(std::move(e));
  }

  void walk(const html::Node& n) {
    if (!n.is_element()) return;
    if (!n.tag.empty() && is_hidden(n)) return;
    if (!n.tag.empty()) {
      std::string role = native_role(n);
      if (auto* explicit_role = n.attr("role")) {
        auto r = to_lower(trim(*explicit_role));
        if (is_interactive_role(r)) role = r;
      }
      if (role.empty() && n.has_attr("onclick")) role = "button";
      if (!role.empty()) {
        emit(n, role, true);
        return;  // descendants are folded into the element's name
      }
      if (n.tag == "img" && !attr_text(n, "alt").empty()) {
        emit(n, "img", false);
        return;
      }
    }
    for (const auto& child : n.children) walk(*child);
  }
};

}  // namespace

const ElementNode* A11ySnapshot::find(ElementId id) const {
  for (const auto& e : elements) {
    if (e.index == id) return &e;
  }
  return nullptr;
}

A11ySnapshot build_a11y(const html::Document& doc, Viewport viewport, int scroll_y, std::string url) {
  Walker walker{viewport, scroll_y, {}};
  walker.walk(*doc.root);
  A11ySnapshot snap;
  snap.url = std::move(url);
  snap.viewport = viewport;
  snap.scroll_y = scroll_y;
  snap.elements = std::move(walker.out);
  return snap;
}

A11ySnapshot build_a11y(std::string_view html, Viewport viewport, int scroll_y, std::string url) {
  return build_a11y(html::parse(html), viewport, scroll_y, std::move(url));
}

std::string serialize_a11y(const A11ySnapshot& snapshot, std::size_t limit) {
  std::string out;
  std::size_t n = std::min(limit, snapshot.elements.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = snapshot.elements[i];
    if (i > 0) out.push_back('\n');
    out += "[" + std::to_string(e.index.value) + "] [" + e.role + "] [" + e.name + "]";
  }
  return out;
}

double default_rank_score(const ElementNode& node) {
  // Interactables outrank any area: boxes are bounded well below 1e12 px^2.
  const double visible_area = node.in_viewport ? static_cast<double>(node.bbox.area()) : 0.0;
  return (node.interactable ? 1e12 : 0.0) + visible_area;
}

A11ySnapshot select_candidates(const A11ySnapshot& snapshot, const Ranker& ranker, std::size_t k,
                               std::optional<ElementId> must_include) {
  if (must_include && snapshot.find(*must_include) == nullptr) {
    throw MustIncludeMissing("element " + std::to_string(must_include->value) +
                             " is not in the snapshot");
  }
  const auto& elems = snapshot.elements;
  std::vector<std::size_t> order(elems.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> scores(elems.size());
  for (std::size_t i = 0; i < elems.size(); ++i) scores[i] = ranker(elems[i]);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  if (order.size() > k) order.resize(k);
  if (must_include) {
    bool present = std::any_of(order.begin(), order.end(),
                               [&](std::size_t i) { return elems[i].index == *must_include; });
    if (!present && k > 0) {
      auto pos = static_cast<std::size_t>(
          std::find_if(elems.begin(), elems.end(),
                       [&](const ElementNode& e) { return e.index == *must_include; }) -
          elems.begin());
      order.back() = pos;
    }
  }
  std::sort(order.begin(), order.end());
  A11ySnapshot out = snapshot;
  out.elements.clear();
  for (auto i : order) out.elements.push_back(elems[i]);
  return out;
}

std::vector<ElementNode> viewport_elements(const A11ySnapshot& snapshot) {
  std::vector<ElementNode> out;
  const int vw = snapshot.viewport.width;
  const int vh = snapshot.viewport.height;
  for (const auto& e : snapshot.elements) {
    if (!e.in_viewport) continue;
    int x0 = std::max(0, e.bbox.x);
    int y0 = std::max(0, e.bbox.y - snapshot.scroll_y);
    int x1 = std::min(vw, e.bbox.x + e.bbox.w);
    int y1 = std::min(vh, e.bbox.y + e.bbox.h - snapshot.scroll_y);
    if (x1 <= x0 || y1 <= y0) continue;
    ElementNode v = e;
    v.bbox = BBox{x0, y0, x1 - x0, y1 - y0};
    out.push_back(std::move(v));
  }
  return out;
}

nlohmann::json to_json(const ElementNode& node) {
  return {{"index", node.index.value},
          {"role", node.role},
          {"name", node.name},
          {"bbox", {node.bbox.x, node.bbox.y, node.bbox.w, node.bbox.h}},
          {"interactable", node.interactable},
          {"in_viewport", node.in_viewport},
          {"options", node.options},
          {"source_ref", node.source_ref}};
}

ElementNode element_from_json(const nlohmann::json& j) {
  ElementNode e;
  e.index = ElementId{j.at("index").get<std::uint32_t>()};
  e.role = j.at("role").get<std::string>();
  e.name = j.at("name").get<std::string>();
  const auto& b = j.at("bbox");
  e.bbox = BBox{b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
  e.interactable = j.value("interactable", true);
  e.in_viewport = j.value("in_viewport", true);
  e.options = j.value("options", std::vector<std::string>{});
  e.source_ref = j.value("source_ref", std::string{});
  return e;
}

nlohmann::json to_json(const A11ySnapshot& snapshot) {
  nlohmann::json elems = nlohmann::json::array();
  for (const auto& e : snapshot.elements) elems.push_back(to_json(e));
  return {{"url", snapshot.url},
          {"viewport", {{"width", snapshot.viewport.width}, {"height", snapshot.viewport.height}}},
          {"scroll_y", snapshot.scroll_y},
          {"elements", std::move(elems)}};
}

A11ySnapshot snapshot_from_json(const nlohmann::json& j) {
  A11ySnapshot s;
  s.url = j.value("url", std::string{});
  s.viewport = Viewport{j.at("viewport").at("width").get<int>(), j.at("viewport").at("height").get<int>()};
  s.scroll_y = j.value("scroll_y", 0);
  for (const auto& e : j.at("elements")) s.elements.push_back(element_from_json(e));
  return s;
}

}  // namespace websynth
