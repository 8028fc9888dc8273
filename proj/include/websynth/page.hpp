#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "websynth/action.hpp"
#include "websynth/html.hpp"
#include "websynth/image.hpp"

namespace websynth {

struct Viewport {
  int width = 1280;
  int height = 720;
  friend bool operator==(const Viewport&, const Viewport&) = default;
};

struct BBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  long long area() const { return static_cast<long long>(w) * h; }
  friend bool operator==(const BBox&, const BBox&) = default;
};

struct ElementNode {
  ElementId index;
  std::string role;
  std::string name;
  BBox bbox;  // page coordinates
  bool interactable = true;
  // False when the box lies entirely outside the current viewport; such
  // elements stay enumerated so scrolling can reach them.
  bool in_viewport = true;
  std::vector<std::string> options;  // select controls only
  std::string source_ref;            // structural locator into the source DOM
  friend bool operator==(const ElementNode&, const ElementNode&) = default;
};

struct A11ySnapshot {
  std::string url;
  Viewport viewport;
  int scroll_y = 0;
  std::vector<ElementNode> elements;

  const ElementNode* find(ElementId id) const;
  friend bool operator==(const A11ySnapshot&, const A11ySnapshot&) = default;
};

// Builds the element list for `html` as laid out in `viewport` scrolled to
// `scroll_y`. Element boxes come from `data-bbox="x,y,w,h"` attributes when
// present; otherwise a fixed stacked layout is used (see layout note in
// page.cpp). Names are taken from aria-label, then alt, then value, then
// visible text, then placeholder/title.
A11ySnapshot build_a11y(std::string_view html, Viewport viewport, int scroll_y = 0,
                        std::string url = {});
A11ySnapshot build_a11y(const html::Document& doc, Viewport viewport, int scroll_y = 0,
                        std::string url = {});

// "[idx] [role] [name]" lines, newline separated, at most `limit` lines.
std::string serialize_a11y(const A11ySnapshot& snapshot, std::size_t limit = SIZE_MAX);

using Ranker = std::function<double(const ElementNode&)>;

// Interactable elements first, then larger on-screen area.
double default_rank_score(const ElementNode& node);

class MustIncludeMissing : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Top-k elements by ranker score (ties broken by document order), returned in
// document order. `must_include` takes the last slot when it would otherwise
// fall outside the top k.
A11ySnapshot select_candidates(const A11ySnapshot& snapshot, const Ranker& ranker, std::size_t k,
                               std::optional<ElementId> must_include = std::nullopt);

// Elements that intersect the viewport, with boxes translated to viewport
// coordinates and clipped to it; these are what a set-of-mark overlay draws.
std::vector<ElementNode> viewport_elements(const A11ySnapshot& snapshot);

class BboxOutOfBounds : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Set-of-mark rendering: an outline around every element box plus its index
// tag at the top-left corner. Output has the input's dimensions.
Image annotate_som(const Image& screenshot, const std::vector<ElementNode>& elements);

// Markdown view of a page: headings as '#' prefixes, links as [text](url),
// list items as "- ", tables as pipe rows, scripts/styles dropped, blocks
// separated by blank lines.
std::string render_markdown(std::string_view html);
std::string render_markdown(const html::Document& doc);

// One environment snapshot as the agents see it.
struct PageObservation {
  std::shared_ptr<const Image> screenshot;
  std::shared_ptr<const Image> som_screenshot;
  A11ySnapshot a11y;
  std::string html;
  std::string url;
  std::string digest;  // page-state digest at observation time
};

nlohmann::json to_json(const ElementNode& node);
ElementNode element_from_json(const nlohmann::json& j);
nlohmann::json to_json(const A11ySnapshot& snapshot);
A11ySnapshot snapshot_from_json(const nlohmann::json& j);

}  // namespace websynth
