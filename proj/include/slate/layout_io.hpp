#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ast.hpp"
#include "geom.hpp"

namespace slate {

class LayoutIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LayoutObject {
    long long id = 0;
    std::string type;
    std::vector<std::string> properties;
    BoundingBox bbox;

    friend bool operator==(const LayoutObject& a, const LayoutObject& b) {
        return a.id == b.id && a.type == b.type && a.properties == b.properties &&
               a.bbox == b.bbox;
    }
    friend bool operator!=(const LayoutObject& a, const LayoutObject& b) { return !(a == b); }
};

// Serialized layout: object metadata plus integer per-mille boxes on a
// 1000x1000 canvas.  Pixel conversion is a renderer concern.
struct LayoutDoc {
    unit_t image_w = 1000;
    unit_t image_h = 1000;
    std::vector<LayoutObject> objects;

    friend bool operator==(const LayoutDoc& a, const LayoutDoc& b) {
        return a.image_w == b.image_w && a.image_h == b.image_h && a.objects == b.objects;
    }
    friend bool operator!=(const LayoutDoc& a, const LayoutDoc& b) { return !(a == b); }
};

inline constexpr int kLayoutSchemaVersion = 1;

inline LayoutDoc make_layout_doc(const DesignSpec& spec, const Layout& layout) {
    if (layout.size() != spec.objects.size())
        throw LayoutIoError("layout box count does not match the spec's object count");
    LayoutDoc doc;
    doc.objects.reserve(layout.size());
    for (size_t i = 0; i < layout.size(); ++i) {
        LayoutObject o;
        o.id = spec.objects[i].id;
        o.type = spec.objects[i].type_name;
        o.properties = spec.objects[i].properties;
        o.bbox = layout[i];
        doc.objects.push_back(std::move(o));
    }
    return doc;
}

inline nlohmann::json to_json(const LayoutDoc& doc) {
    nlohmann::json j;
    j["schema"] = kLayoutSchemaVersion;
    j["image_size"] = {{"w", doc.image_w}, {"h", doc.image_h}};
    nlohmann::json objects = nlohmann::json::array();
    for (const LayoutObject& o : doc.objects) {
        nlohmann::json e;
        e["id"] = o.id;
        e["type"] = o.type;
        e["properties"] = o.properties;
        e["bbox"] = {{"x", o.bbox.x}, {"y", o.bbox.y}, {"w", o.bbox.w}, {"h", o.bbox.h}};
        objects.push_back(std::move(e));
    }
    j["objects"] = std::move(objects);
    return j;
}

inline LayoutDoc layout_doc_from_json(const nlohmann::json& j) {
    try {
        if (!j.is_object() || !j.contains("schema"))
            throw LayoutIoError("layout document is missing the schema field");
        if (!j["schema"].is_number_integer() || j["schema"].get<int>() != kLayoutSchemaVersion)
            throw LayoutIoError("unsupported layout schema " + j["schema"].dump());
        LayoutDoc doc;
        doc.image_w = j.at("image_size").at("w").get<unit_t>();
        doc.image_h = j.at("image_size").at("h").get<unit_t>();
        for (const nlohmann::json& e : j.at("objects")) {
            LayoutObject o;
            o.id = e.at("id").get<long long>();
            o.type = e.at("type").get<std::string>();
            o.properties = e.at("properties").get<std::vector<std::string>>();
            const nlohmann::json& b = e.at("bbox");
            o.bbox = BoundingBox{b.at("x").get<unit_t>(), b.at("y").get<unit_t>(),
                                 b.at("w").get<unit_t>(), b.at("h").get<unit_t>()};
            doc.objects.push_back(std::move(o));
        }
        return doc;
    } catch (const nlohmann::json::exception& e) {
        throw LayoutIoError(std::string("malformed layout document: ") + e.what());
    }
}

inline std::string layout_to_string(const LayoutDoc& doc) { return to_json(doc).dump(2) + "\n"; }

inline LayoutDoc layout_from_string(const std::string& text) {
    try {
        return layout_doc_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw LayoutIoError(std::string("malformed layout document: ") + e.what());
    }
}

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace detail

// Renders boxes 1:1 into a 1000x1000 viewBox, one labeled rectangle per
// object, ordered by id.
inline std::string render_svg(const LayoutDoc& doc) {
    static constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                                               "#59a14f", "#edc948", "#b07aa1", "#9c755f"};
    constexpr size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

    std::vector<const LayoutObject*> order;
    order.reserve(doc.objects.size());
    for (const LayoutObject& o : doc.objects) order.push_back(&o);
    std::sort(order.begin(), order.end(),
              [](const LayoutObject* a, const LayoutObject* b) { return a->id < b->id; });

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1000 1000\" "
          "width=\"1000\" height=\"1000\" style=\"background:#ffffff\">\n";
    for (size_t i = 0; i < order.size(); ++i) {
        const LayoutObject& o = *order[i];
        const char* color = kPalette[i % kPaletteSize];
        os << "  <rect x=\"" << o.bbox.x << "\" y=\"" << o.bbox.y << "\" width=\"" << o.bbox.w
           << "\" height=\"" << o.bbox.h << "\" fill=\"" << color
           << "\" fill-opacity=\"0.4\" stroke=\"" << color << "\" stroke-width=\"3\"/>\n";
        os << "  <text x=\"" << o.bbox.x + 6 << "\" y=\"" << o.bbox.y + 26
           << "\" font-family=\"monospace\" font-size=\"22\">" << o.id << ":"
           << detail::xml_escape(o.type) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LayoutIoError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LayoutIoError("cannot open '" + path + "' for writing");
    out << text;
    out.close();
    if (!out) throw LayoutIoError("failed writing '" + path + "'");
}

} // namespace slate
