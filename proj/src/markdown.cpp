#include <algorithm>
#include <array>

#include "websynth/page.hpp"
#include "websynth/util.hpp"

namespace websynth {

namespace {

using html::Node;

constexpr char kLineBreak = '\x01';

bool skipped(const Node& n) {
  if (n.tag == "script" || n.tag == "style" || n.tag == "noscript" || n.tag == "template" ||
      n.tag == "head" || n.tag == "select" || n.tag == "input" || n.tag == "textarea") {
    return true;
  }
  if (n.has_attr("hidden")) return true;
  if (auto* style = n.attr("style")) {
    std::string compact;
    for (char c : to_lower(*style)) {
      if (c != ' ') compact.push_back(c);
    }
    if (compact.find("display:none") != std::string::npos) return true;
  }
  return false;
}

bool is_block(std::string_view tag) {
  static constexpr std::array<std::string_view, 26> kBlocks = {
      "address", "article", "aside", "blockquote", "body", "details", "dd", "div", "dl", "dt",
      "fieldset", "figcaption", "figure", "footer", "form", "header", "html", "li", "main", "nav",
      "p", "section", "summary", "tbody", "tr", "center"};
  return std::find(kBlocks.begin(), kBlocks.end(), tag) != kBlocks.end();
}

int heading_level(std::string_view tag) {
  if (tag.size() == 2 && tag[0] == 'h' && tag[1] >= '1' && tag[1] <= '6') return tag[1] - '0';
  return 0;
}

// Collapses whitespace but keeps explicit <br> breaks as newlines.
std::string finish_inline(const std::string& raw) {
  std::string out;
  std::size_t start = 0;
  while (start <= raw.size()) {
    auto end = raw.find(kLineBreak, start);
    if (end == std::string::npos) end = raw.size();
    auto piece = collapse_whitespace(std::string_view(raw).substr(start, end - start));
    if (!out.empty() && !piece.empty()) out.push_back('\n');
    out += piece;
    if (end == raw.size()) break;
    start = end + 1;
  }
  return out;
}

std::string escape_cell(std::string s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out.push_back(' ');
    else out.push_back(c);
  }
  return out;
}

class Renderer {
 public:
  std::string run(const Node& root) {
    block(root);
    flush();
    std::string out;
    for (const auto& b : blocks_) {
      if (!out.empty()) out += "\n\n";
      out += b;
    }
    return out;
  }

 private:
  void flush() {
    auto text = finish_inline(inline_);
    inline_.clear();
    if (!text.empty()) blocks_.push_back(std::move(text));
  }

  void emit_block(std::string text) {
    flush();
    if (!text.empty()) blocks_.push_back(std::move(text));
  }

  // Inline rendering of a subtree into `out`; nested blocks become spaces.
  void inline_into(const Node& n, std::string& out) {
    if (n.kind == Node::Kind::kText) {
      out += n.text;
      return;
    }
    if (skipped(n)) return;
    if (n.tag == "br") {
      out.push_back(kLineBreak);
      return;
    }
    if (n.tag == "img") {
      auto* alt = n.attr("alt");
      if (alt && !collapse_whitespace(*alt).empty()) {
        auto* src = n.attr("src");
        out += "![" + collapse_whitespace(*alt) + "](" + (src ? *src : std::string{}) + ")";
      }
      return;
    }
    if (n.tag == "a") {
      auto label = html::text_content(n);
      auto* href = n.attr("href");
      if (href && !label.empty()) {
        out += " [" + label + "](" + std::string(trim(*href)) + ") ";
      } else {
        out += " " + label + " ";
      }
      return;
    }
    bool spaced = is_block(n.tag) || heading_level(n.tag) > 0 || n.tag == "td" || n.tag == "th" ||
                  n.tag == "ul" || n.tag == "ol" || n.tag == "table" || n.tag == "pre";
    if (spaced) out.push_back(' ');
    for (const auto& c : n.children) inline_into(*c, out);
    if (spaced) out.push_back(' ');
  }

  std::string inline_of(const Node& n) {
    std::string raw;
    for (const auto& c : n.children) inline_into(*c, raw);
    return finish_inline(raw);
  }

  void list(const Node& n, int depth, std::vector<std::string>& lines) {
    const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    for (const auto& child : n.children) {
      if (!child->is_element() || skipped(*child)) continue;
      if (child->tag == "ul" || child->tag == "ol") {
        list(*child, depth + 1, lines);
        continue;
      }
      if (child->tag != "li") continue;
      std::string raw;
      std::vector<const Node*> nested;
      for (const auto& gc : child->children) {
        if (gc->is_element("ul") || gc->is_element("ol")) {
          nested.push_back(gc.get());
        } else {
          inline_into(*gc, raw);
        }
      }
      auto text = finish_inline(raw);
      std::replace(text.begin(), text.end(), '\n', ' ');
      lines.push_back(indent + "- " + text);
      for (const auto* sub : nested) list(*sub, depth + 1, lines);
    }
  }

  void collect_rows(const Node& n, std::vector<const Node*>& rows) {
    for (const auto& child : n.children) {
      if (!child->is_element() || skipped(*child)) continue;
      if (child->tag == "tr") {
        rows.push_back(child.get());
      } else if (child->tag == "thead" || child->tag == "tbody" || child->tag == "tfoot") {
        collect_rows(*child, rows);
      }
    }
  }

  void table(const Node& n) {
    std::vector<const Node*> rows;
    collect_rows(n, rows);
    std::vector<std::string> lines;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::vector<std::string> cells;
      bool all_header = true;
      for (const auto& cell : rows[r]->children) {
        if (!cell->is_element("td") && !cell->is_element("th")) continue;
        if (!cell->is_element("th")) all_header = false;
        cells.push_back(escape_cell(inline_of(*cell)));
      }
      if (cells.empty()) continue;
      std::string line = "|";
      for (const auto& c : cells) line += " " + c + " |";
      lines.push_back(line);
      if (r == 0 && all_header) {
        std::string sep = "|";
        for (std::size_t i = 0; i < cells.size(); ++i) sep += " --- |";
        lines.push_back(sep);
      }
    }
    std::string out;
    for (const auto& l : lines) {
      if (!out.empty()) out.push_back('\n');
      out += l;
    }
    emit_block(std::move(out));
  }

  void block(const Node& n) {
    if (n.kind == Node::Kind::kText) {
      inline_ += n.text;
      return;
    }
    if (skipped(n)) return;
    if (int level = heading_level(n.tag); level > 0) {
      auto text = inline_of(n);
      std::replace(text.begin(), text.end(), '\n', ' ');
      emit_block(text.empty() ? std::string{} : std::string(static_cast<std::size_t>(level), '#') + " " + text);
      return;
    }
    if (n.tag == "ul" || n.tag == "ol") {
      std::vector<std::string> lines;
      list(n, 0, lines);
      std::string out;
      for (const auto& l : lines) {
        if (!out.empty()) out.push_back('\n');
        out += l;
      }
      emit_block(std::move(out));
      return;
    }
    if (n.tag == "table") {
      table(n);
      return;
    }
    if (n.tag == "pre") {
      std::string raw;
      std::vector<const Node*> pending{&n};
      while (!pending.empty()) {
        const Node* cur = pending.back();
        pending.pop_back();
        if (cur->kind == Node::Kind::kText) {
          raw += cur->text;
          continue;
        }
        for (auto it = cur->children.rbegin(); it != cur->children.rend(); ++it) {
          pending.push_back(it->get());
        }
      }
      while (!raw.empty() && raw.front() == '\n') raw.erase(raw.begin());
      while (!raw.empty() && (raw.back() == '\n' || raw.back() == ' ')) raw.pop_back();
      emit_block("```\n" + raw + "\n```");
      return;
    }
    if (n.tag == "hr") {
      emit_block("---");
      return;
    }
    if (n.tag.empty() || is_block(n.tag) || n.tag == "td" || n.tag == "th") {
      flush();
      for (const auto& c : n.children) block(*c);
      flush();
      return;
    }
    inline_into(n, inline_);
  }

  std::vector<std::string> blocks_;
  std::string inline_;
};

}  // namespace

std::string render_markdown(const html::Document& doc) {
  return Renderer{}.run(*doc.root);
}

std::string render_markdown(std::string_view html) {
  return render_markdown(html::parse(html));
}

}  // namespace websynth
