#!/usr/bin/env python3
"""Generates the fixture shop and the 20-element page.

Each page is described once below; the script lays it out, writes HTML with
data-bbox attributes, renders a full-page PNG with Pillow, and writes the
element list it expects a parser to enumerate (index, role, name, bbox).
"""

import argparse
import html
import json
import os

from PIL import Image, ImageDraw, ImageFont

WIDTH = 1280
VIEW_H = 720
MARGIN = 40

FONT = ImageFont.load_default()

BG = (255, 255, 255)
TEXT = (30, 30, 30)
MUTED = (120, 120, 120)
LINK = (20, 80, 200)
BUTTON = (0, 88, 163)
BAND_COLORS = [(247, 247, 250), (250, 247, 242)]


class Layout:
    def __init__(self, site, page_id):
        self.site = site
        self.page_id = page_id
        self.y = 0
        self.html = []
        self.draw_ops = []
        self.elements = []

    def element(self, role, name, box, interactable=True, options=None):
        entry = {"index": len(self.elements), "role": role, "name": name,
                 "bbox": list(box), "interactable": interactable}
        if options is not None:
            entry["options"] = options
        self.elements.append(entry)

    @staticmethod
    def bbox_attr(box):
        return 'data-bbox="%d,%d,%d,%d"' % box


def text_width(s):
    return int(FONT.getlength(s)) if hasattr(FONT, "getlength") else 6 * len(s)


def esc(s):
    return html.escape(s, quote=True)


def href_for(site, target):
    return "/" + target if not target.startswith("fixture://") else target


def render_block(L, block):
    kind = block[0]
    x = MARGIN
    if kind == "h1":
        L.html.append("<h1>%s</h1>" % esc(block[1]))
        L.draw_ops.append(("text", (x, L.y + 12), block[1], TEXT, 2))
        L.y += 56
    elif kind == "h2":
        L.html.append("<h2>%s</h2>" % esc(block[1]))
        L.draw_ops.append(("text", (x, L.y + 10), block[1], TEXT, 1))
        L.y += 40
    elif kind == "p":
        L.html.append("<p>%s</p>" % esc(block[1]))
        L.draw_ops.append(("text", (x, L.y + 8), block[1], MUTED, 1))
        L.y += 32
    elif kind == "spacer":
        L.y += block[1]
    elif kind == "nav":
        parts = []
        cx = x
        for text, target in block[1]:
            w = max(60, text_width(text) + 24)
            box = (cx, L.y + 6, w, 28)
            parts.append('<a href="%s" %s>%s</a>' % (esc(href_for(L.site, target)), Layout.bbox_attr(box), esc(text)))
            L.draw_ops.append(("link", box, text))
            L.element("link", text, box)
            cx += w + 16
        L.html.append("<nav>%s</nav>" % " ".join(parts))
        L.y += 40
    elif kind == "link":
        text, target = block[1], block[2]
        box = (x, L.y + 4, max(80, text_width(text) + 24), 28)
        L.html.append('<p><a href="%s" %s>%s</a></p>' % (esc(href_for(L.site, target)), Layout.bbox_attr(box), esc(text)))
        L.draw_ops.append(("link", box, text))
        L.element("link", text, box)
        L.y += 36
    elif kind == "button":
        text = block[1]
        extra = block[2] if len(block) > 2 else {}
        box = (x, L.y + 4, max(120, text_width(text) + 40), 36)
        attrs = Layout.bbox_attr(box)
        name = text
        if "aria-label" in extra:
            attrs += ' aria-label="%s"' % esc(extra["aria-label"])
            name = extra["aria-label"]
        interactable = True
        if extra.get("disabled"):
            attrs += " disabled"
            interactable = False
        L.html.append('<button type="button" %s>%s</button>' % (attrs, esc(text)))
        L.draw_ops.append(("button", box, text, interactable))
        L.element("button", name, box, interactable)
        L.y += 44
    elif kind == "input":
        label, placeholder = block[1], block[2]
        itype = block[3] if len(block) > 3 else "text"
        box = (x, L.y + 4, 360, 32)
        L.html.append('<label>%s <input type="%s" name="%s" placeholder="%s" %s></label>'
                      % (esc(label), itype, esc(label.lower().replace(" ", "_")), esc(placeholder), Layout.bbox_attr(box)))
        L.draw_ops.append(("input", box, placeholder))
        # The label wraps the input, but the input itself is what gets enumerated.
        L.element("textbox", placeholder, box)
        L.y += 40
    elif kind == "textarea":
        placeholder = block[1]
        box = (x, L.y + 4, 480, 80)
        L.html.append('<textarea placeholder="%s" %s></textarea>' % (esc(placeholder), Layout.bbox_attr(box)))
        L.draw_ops.append(("input", box, placeholder))
        L.element("textbox", placeholder, box)
        L.y += 88
    elif kind == "check":
        itype, label = block[1], block[2]
        box = (x, L.y + 6, 20, 20)
        L.html.append('<p><input type="%s" aria-label="%s" %s> %s</p>' % (itype, esc(label), Layout.bbox_attr(box), esc(label)))
        L.draw_ops.append(("check", box, label))
        L.element(itype, label, box)
        L.y += 32
    elif kind == "range":
        label = block[1]
        box = (x, L.y + 6, 240, 20)
        L.html.append('<p><input type="range" aria-label="%s" %s></p>' % (esc(label), Layout.bbox_attr(box)))
        L.draw_ops.append(("range", box, label))
        L.element("slider", label, box)
        L.y += 32
    elif kind == "submit":
        value = block[1]
        box = (x, L.y + 4, max(120, text_width(value) + 40), 36)
        L.html.append('<input type="submit" value="%s" %s>' % (esc(value), Layout.bbox_attr(box)))
        L.draw_ops.append(("button", box, value, True))
        L.element("button", value, box)
        L.y += 44
    elif kind == "select":
        label, options = block[1], block[2]
        selected = block[3] if len(block) > 3 else None
        box = (x, L.y + 4, 240, 32)
        opts = "".join('<option%s>%s</option>' % (" selected" if o == selected else "", esc(o)) for o in options)
        L.html.append('<label>%s <select name="%s" %s>%s</select></label>'
                      % (esc(label), esc(label.lower().replace(" ", "_")), Layout.bbox_attr(box), opts))
        shown = selected or options[0]
        L.draw_ops.append(("select", box, shown))
        L.element("select", shown, box, options=list(options))
        L.y += 40
    elif kind == "img":
        alt, w, h = block[1], block[2], block[3]
        box = (x, L.y + 4, w, h)
        L.html.append('<img src="/img/%s.png" alt="%s" %s>' % (esc(alt.split()[0].lower()), esc(alt), Layout.bbox_attr(box)))
        L.draw_ops.append(("img", box, alt))
        L.element("img", alt, box, interactable=False)
        L.y += h + 8
    elif kind == "rolebutton":
        text = block[1]
        box = (x, L.y + 4, max(120, text_width(text) + 40), 32)
        L.html.append('<div role="button" tabindex="0" %s>%s</div>' % (Layout.bbox_attr(box), esc(text)))
        L.draw_ops.append(("button", box, text, True))
        L.element("button", text, box)
        L.y += 40
    elif kind == "onclick":
        text = block[1]
        box = (x, L.y + 4, max(80, text_width(text) + 24), 28)
        L.html.append('<p><span onclick="void 0" %s>%s</span></p>' % (Layout.bbox_attr(box), esc(text)))
        L.draw_ops.append(("link", box, text))
        L.element("button", text, box)
        L.y += 36
    elif kind == "hidden":
        # Present in the markup, never enumerated or drawn.
        L.html.append(block[1])
    elif kind == "list":
        items = "".join("<li>%s</li>" % esc(i) for i in block[1])
        L.html.append("<ul>%s</ul>" % items)
        for i in block[1]:
            L.draw_ops.append(("text", (x + 16, L.y + 6), "- " + i, TEXT, 1))
            L.y += 24
        L.y += 8
    elif kind == "table":
        rows = block[1]
        out = []
        for r, row in enumerate(rows):
            cell = "th" if r == 0 else "td"
            out.append("<tr>%s</tr>" % "".join("<%s>%s</%s>" % (cell, esc(c), cell) for c in row))
            for c, val in enumerate(row):
                L.draw_ops.append(("text", (x + 8 + 220 * c, L.y + 8), val, TEXT if r else MUTED, 1))
            L.draw_ops.append(("rule", (x, L.y + 30, 220 * len(row), 1)))
            L.y += 32
        L.html.append("<table>%s</table>" % "".join(out))
        L.y += 8
    elif kind == "form":
        L.html.append('<form action="%s">' % esc(block[1]))
        for b in block[2]:
            render_block(L, b)
        L.html.append("</form>")
    else:
        raise ValueError("unknown block " + kind)


def draw_text(d, pos, s, color, scale):
    if scale == 1:
        d.text(pos, s, fill=color, font=FONT)
        return
    # Larger headings: draw a few offset copies for weight instead of a second font.
    for dx in range(scale):
        d.text((pos[0] + dx, pos[1]), s, fill=color, font=FONT)


def render_png(L, height):
    img = Image.new("RGB", (WIDTH, height), BG)
    d = ImageDraw.Draw(img)
    for i, top in enumerate(range(0, height, 360)):
        d.rectangle([0, top, WIDTH - 1, min(height, top + 360) - 1], fill=BAND_COLORS[i % 2])
        d.text((WIDTH - 120, top + 6), "y=%d" % top, fill=(200, 200, 200), font=FONT)
    for op in L.draw_ops:
        kind = op[0]
        if kind == "text":
            draw_text(d, op[1], op[2], op[3], op[4])
        elif kind == "rule":
            x, y, w, h = op[1]
            d.rectangle([x, y, x + w - 1, y + h - 1], fill=(210, 210, 210))
        elif kind in ("link",):
            x, y, w, h = op[1]
            d.text((x + 12, y + 8), op[2], fill=LINK, font=FONT)
            d.line([x + 12, y + 20, x + 12 + text_width(op[2]), y + 20], fill=LINK)
        elif kind == "button":
            x, y, w, h = op[1]
            fill = BUTTON if op[3] else (170, 170, 170)
            d.rectangle([x, y, x + w - 1, y + h - 1], fill=fill)
            d.text((x + 20, y + 12), op[2], fill=(255, 255, 255), font=FONT)
        elif kind in ("input", "select"):
            x, y, w, h = op[1]
            d.rectangle([x, y, x + w - 1, y + h - 1], outline=(140, 140, 140), fill=(255, 255, 255))
            d.text((x + 8, y + 10), op[2], fill=MUTED if kind == "input" else TEXT, font=FONT)
            if kind == "select":
                d.text((x + w - 18, y + 10), "v", fill=TEXT, font=FONT)
        elif kind == "check":
            x, y, w, h = op[1]
            d.rectangle([x, y, x + w - 1, y + h - 1], outline=(90, 90, 90), fill=(255, 255, 255))
            d.text((x + w + 10, y + 4), op[2], fill=TEXT, font=FONT)
        elif kind == "range":
            x, y, w, h = op[1]
            d.line([x, y + h // 2, x + w, y + h // 2], fill=(90, 90, 90), width=3)
            d.ellipse([x + w // 2 - 8, y + 2, x + w // 2 + 8, y + 18], fill=BUTTON)
        elif kind == "img":
            x, y, w, h = op[1]
            d.rectangle([x, y, x + w - 1, y + h - 1], fill=(214, 200, 180))
            d.text((x + 10, y + h // 2 - 6), op[2], fill=(80, 60, 40), font=FONT)
    return img


def build_page(site, page_def):
    L = Layout(site, page_def["id"])
    L.html.append("<!DOCTYPE html>")
    L.html.append("<html><head><meta charset=\"utf-8\"><title>%s</title>" % esc(page_def["title"]))
    L.html.append("<style>body{font-family:sans-serif}</style><script>window.__fixture=true;</script></head>")
    L.html.append("<body>")
    L.y = 8
    L.html.append("<header>")
    for b in page_def.get("header", []):
        render_block(L, b)
    L.html.append("</header><main>")
    for b in page_def["blocks"]:
        render_block(L, b)
    L.html.append("</main>")
    if page_def.get("footer"):
        L.html.append("<footer>")
        for b in page_def["footer"]:
            render_block(L, b)
        L.html.append("</footer>")
    L.html.append("</body></html>")
    height = max(VIEW_H, page_def.get("min_height", 0), L.y + 16)
    return "\n".join(L.html) + "\n", render_png(L, height), L.elements


NAV = ("nav", [("Deals", "deals"), ("Living Room", "living"), ("Dining", "dining"), ("Cart", "cart"), ("Sign in", "login")])
BRAND = ("h1", "Fixture Home Furnishings")

SHOP_PAGES = [
    {"id": "home", "title": "Fixture Home Furnishings", "min_height": 1700,
     "header": [BRAND, NAV],
     "blocks": [
         ("form", "/search", [("input", "Search", "Search products"), ("button", "Search")]),
         ("h2", "Featured this week"),
         ("link", "UPPLAND Sofa", "sofa"),
         ("link", "STRANDMON Armchair", "chair"),
         ("link", "EKEDALEN Table", "table"),
         ("img", "Living room with a beige three-seat sofa", 640, 320),
         ("spacer", 420),
         ("h2", "Why shop with us"),
         ("list", ["Free delivery over $500", "365-day returns", "Assembly service available"]),
         ("spacer", 280),
     ],
     "footer": [("link", "Customer service", "login")],
     "transitions": {"type [5] [*]": "search", "click [6]": "search"}},
    {"id": "deals", "title": "Today's deals",
     "header": [BRAND, NAV],
     "blocks": [
         ("h2", "Today's deals"),
         ("p", "Limited-time prices on living and dining furniture."),
         ("link", "STRANDMON Armchair - now $249", "chair"),
         ("link", "EKEDALEN Table - now $349", "table"),
         ("select", "Sort by", ["Featured", "Price: low to high", "Price: high to low"]),
     ]},
    {"id": "living", "title": "Living Room",
     "header": [BRAND, NAV],
     "blocks": [
         ("h2", "Living room furniture"),
         ("link", "UPPLAND Sofa", "sofa"),
         ("link", "STRANDMON Armchair", "chair"),
         ("check", "checkbox", "Fabric only"),
         ("select", "Seats", ["Any", "2 seats", "3 seats"]),
     ]},
    {"id": "dining", "title": "Dining",
     "header": [BRAND, NAV],
     "blocks": [
         ("h2", "Dining furniture"),
         ("link", "EKEDALEN Table", "table"),
         ("p", "Extendable tables seat four to six."),
     ]},
    {"id": "search", "title": "Search results",
     "header": [BRAND, NAV],
     "blocks": [
         ("h2", "Results for your search"),
         ("link", "UPPLAND Sofa", "sofa"),
         ("link", "STRANDMON Armchair", "chair"),
         ("p", "2 results"),
     ]},
    {"id": "sofa", "title": "UPPLAND Sofa",
     "header": [BRAND, NAV],
     "blocks": [
         ("h2", "UPPLAND Sofa"),
         ("img", "UPPLAND three-seat sofa in beige fabric", 480, 240),
         ("p", "Three-seat sofa, fabric cover. $899"),
         ("select", "Color", ["Beige", "Dark Grey", "Blue"]),
         ("select", "Quantity", ["1", "2", "3"]),
         ("button", "Add to cart"),
         ("link", "Back to Living Room", "living"),
     ],
     "transitions": {"click [8]": "cart"}},
    {"id": "chair", "title": "STRANDMON Armchair",
     "header": [BRAND, NAV],
     "blocks": [
         ("h2", "STRANDMON Armchair"),
         ("img", "STRANDMON wing chair in green", 320, 240),
         ("p", "Wing chair. $249"),
         ("button", "Add to cart"),
     ],
     "transitions": {"click [6]": "cart"}},
    {"id": "table", "title": "EKEDALEN Table",
     "header": [BRAND, NAV],
     "blocks": [
         ("h2", "EKEDALEN Table"),
         ("img", "EKEDALEN extendable table in oak", 320, 200),
         ("p", "Extendable table, 120-180 cm. $349"),
         ("button", "Add to cart"),
     ],
     "transitions": {"click [6]": "cart"}},
    {"id": "cart", "title": "Your cart",
     "header": [BRAND, NAV],
     "blocks": [
         ("h2", "Your cart"),
         ("table", [["Item", "Qty", "Price"], ["UPPLAND Sofa", "1", "$899"]]),
         ("button", "Proceed to checkout"),
         ("link", "Continue shopping", "home"),
     ],
     "transitions": {"click [5]": "checkout"}},
    {"id": "checkout", "title": "Checkout",
     "header": [BRAND, NAV],
     "blocks": [
         ("h2", "Checkout"),
         ("table", [["Item", "Qty", "Price"], ["UPPLAND Sofa", "1", "$899"]]),
         ("form", "/order", [
             ("input", "Full name", "Full name"),
             ("input", "Address", "Street address"),
             ("select", "Delivery", ["Standard", "Express"]),
             ("button", "Place order"),
         ]),
         ("list", ["Orders ship within 3 days", "Payment on delivery"]),
     ]},
    {"id": "login", "title": "Sign in",
     "header": [BRAND, NAV],
     "blocks": [
         ("h2", "Sign in to your account"),
         ("input", "Email", "Email address"),
         ("input", "Password", "Password", "password"),
         ("button", "Sign in"),
     ]},
    {"id": "serp", "title": "Web search results",
     "blocks": [
         ("h1", "Web search"),
         ("p", "About 1,000 results"),
         ("link", "Fixture Home Furnishings - furniture and home decor", "home"),
         ("p", "Shop sofas, armchairs and dining tables."),
     ]},
]

# Twenty enumerated elements covering every enumeration rule, plus markup that
# must be skipped. Several sit below the first viewport.
SOM_PAGE = {
    "id": "som20", "title": "Element zoo", "min_height": 1400,
    "header": [("h1", "Element zoo")],
    "blocks": [
        ("nav", [("Home", "home"), ("Products", "products"), ("Support", "support")]),
        ("input", "Query", "Search the zoo"),
        ("button", "Go"),
        ("button", "X", {"aria-label": "Close dialog"}),
        ("button", "Unavailable", {"disabled": True}),
        ("check", "checkbox", "Remember me"),
        ("check", "radio", "Express shipping"),
        ("select", "Size", ["Small", "Medium", "Large"], "Medium"),
        ("hidden", '<button type="button" hidden>Hidden button</button>'),
        ("hidden", '<a href="/secret" style="display: none">Secret link</a>'),
        ("hidden", '<input type="hidden" name="token" value="abc">'),
        ("img", "A red armchair", 200, 120),
        ("textarea", "Leave a comment"),
        ("range", "Volume"),
        ("submit", "Send form"),
        ("rolebutton", "Custom widget"),
        ("onclick", "Clickable span"),
        ("link", "Privacy policy", "privacy"),
        ("spacer", 500),
        ("input", "Newsletter", "Your email"),
        ("link", "Below the fold", "below"),
        ("button", "Load more"),
    ],
}


def write_site(out_dir, host):
    pages_dir = os.path.join(out_dir, "pages")
    shots_dir = os.path.join(out_dir, "shots")
    os.makedirs(pages_dir, exist_ok=True)
    os.makedirs(shots_dir, exist_ok=True)
    manifest = {"site": host, "entry": "home", "pages": [],
                "search_results": {"sofa": "search", "*": "serp"}}
    expected = {}
    for page_def in SHOP_PAGES:
        html_text, png, elements = build_page(host, page_def)
        # Relative hrefs ("/living") resolve against fixture://shop/<page>.
        with open(os.path.join(pages_dir, page_def["id"] + ".html"), "w", encoding="utf-8") as f:
            f.write(html_text)
        png.save(os.path.join(shots_dir, page_def["id"] + ".png"), optimize=True)
        entry = {"id": page_def["id"], "url": "fixture://%s/%s" % (host, page_def["id"]),
                 "html": "pages/%s.html" % page_def["id"], "screenshot": "shots/%s.png" % page_def["id"]}
        if page_def.get("transitions"):
            entry["transitions"] = page_def["transitions"]
        manifest["pages"].append(entry)
        expected[page_def["id"]] = {"height": png.height, "elements": elements}
    with open(os.path.join(out_dir, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    with open(os.path.join(out_dir, "expected_elements.json"), "w") as f:
        json.dump(expected, f, indent=1)
        f.write("\n")


def write_som_page(out_dir):
    os.makedirs(out_dir, exist_ok=True)
    html_text, png, elements = build_page("zoo", SOM_PAGE)
    assert len(elements) == 20, len(elements)
    with open(os.path.join(out_dir, "page.html"), "w", encoding="utf-8") as f:
        f.write(html_text)
    png.save(os.path.join(out_dir, "page.png"), optimize=True)
    with open(os.path.join(out_dir, "expected_elements.json"), "w") as f:
        json.dump({"height": png.height, "elements": elements}, f, indent=1)
        f.write("\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "fixtures"))
    args = ap.parse_args()
    write_site(os.path.join(args.out, "shop"), "shop")
    write_som_page(os.path.join(args.out, "som20"))


if __name__ == "__main__":
    main()
