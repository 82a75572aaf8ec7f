#pragma once

#include <charconv>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "orb/scene.hpp"

namespace orb {

// Human-readable block/key-value scene format with explicit unit suffixes
// (_cm, _mm, _deg). See docs/scene_format.md for the grammar. Parsing an
// empty file yields the all-defaults scene; parse(serialize(cfg)) == cfg.

struct ParseError : std::runtime_error {
    int line, column;
    ParseError(int line_, int col_, const std::string& msg)
        : std::runtime_error("scene:" + std::to_string(line_) + ":" + std::to_string(col_) +
                             ": " + msg),
          line(line_),
          column(col_) {}
};

namespace detail_fmt {

struct Token {
    enum Kind { Ident, Number, String, Punct, End } kind = End;
    std::string text;
    double number = 0.0;
    int line = 1, col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_ws();
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= src_.size()) return t;
        char c = src_[pos_];
        if (c == '{' || c == '}' || c == '(' || c == ')' || c == ',' || c == '=') {
            t.kind = Token::Punct;
            t.text = c;
            advance();
            return t;
        }
        if (c == '"') {
            advance();
            t.kind = Token::String;
            while (pos_ < src_.size() && src_[pos_] != '"') {
                if (src_[pos_] == '\n') throw ParseError(t.line, t.col, "unterminated string");
                t.text += src_[pos_];
                advance();
            }
            if (pos_ >= src_.size()) throw ParseError(t.line, t.col, "unterminated string");
            advance();
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
            t.kind = Token::Number;
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.' ||
                    src_[pos_] == '-' || src_[pos_] == '+'))
                advance();
            t.text = std::string(src_.substr(start, pos_ - start));
            const char* b = t.text.data();
            const char* e = b + t.text.size();
            auto res = std::from_chars(b, e, t.number);
            if (res.ec != std::errc{} || res.ptr != e)
                throw ParseError(t.line, t.col, "malformed number '" + t.text + "'");
            return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            t.kind = Token::Ident;
            size_t start = pos_;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                          src_[pos_] == '_' || src_[pos_] == '.'))
                advance();
            t.text = std::string(src_.substr(start, pos_ - start));
            return t;
        }
        throw ParseError(line_, col_, std::string("unexpected character '") + c + "'");
    }

private:
    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    void skip_ws() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }
};

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) { bump(); }

    SceneConfig parse() {
        SceneConfig cfg;
        parse_into(cfg, true);
        return cfg;
    }

    void parse_into(SceneConfig& cfg, bool run_validate) {
        while (cur_.kind != Token::End) {
            Token name = expect(Token::Ident, "block name");
            expect_punct("{");
            if (name.text == "orb") parse_orb(cfg.orb);
            else if (name.text == "camera") parse_camera(cfg.camera);
            else if (name.text == "lights") parse_lights(cfg.lights);
            else if (name.text == "relief") parse_relief(cfg);
            else if (name.text == "lines") parse_lines(cfg);
            else if (name.text == "background") parse_background(cfg);
            else if (name.text == "mesh") parse_mesh(cfg);
            else if (name.text == "render") parse_render(cfg.render);
            else throw ParseError(name.line, name.col, "unknown block '" + name.text + "'");
            expect_punct("}");
        }
        if (run_validate) {
            try {
                validate(cfg);
            } catch (const ConfigError& e) {
                throw ParseError(1, 1, e.what());
            }
        }
    }

private:
    Lexer lex_;
    Token cur_;

    void bump() { cur_ = lex_.next(); }
    Token expect(Token::Kind kind, const char* what) {
        if (cur_.kind != kind)
            throw ParseError(cur_.line, cur_.col,
                             std::string("expected ") + what + ", got '" + cur_.text + "'");
        Token t = cur_;
        bump();
        return t;
    }
    void expect_punct(const char* p) {
        if (cur_.kind != Token::Punct || cur_.text != p)
            throw ParseError(cur_.line, cur_.col,
                             std::string("expected '") + p + "', got '" + cur_.text + "'");
        bump();
    }

    double number() { return expect(Token::Number, "number").number; }
    // seeds are full 64-bit; going through the double path would round them
    uint64_t integer64() {
        Token t = expect(Token::Number, "integer");
        try {
            return std::stoull(t.text);
        } catch (const std::exception&) {
            throw ParseError(t.line, t.col, "expected unsigned integer, got '" + t.text + "'");
        }
    }
    std::string string_value() { return expect(Token::String, "string").text; }
    bool boolean() {
        Token t = expect(Token::Ident, "true/false");
        if (t.text == "true") return true;
        if (t.text == "false") return false;
        throw ParseError(t.line, t.col, "expected true or false, got '" + t.text + "'");
    }
    Vec3 vec3() {
        expect_punct("(");
        double a = number();
        expect_punct(",");
        double b = number();
        expect_punct(",");
        double c = number();
        expect_punct(")");
        return {a, b, c};
    }
    RGB rgb() {
        Vec3 v = vec3();
        return {v.x, v.y, v.z};
    }
    std::vector<double> number_list() {
        expect_punct("(");
        std::vector<double> out;
        if (!(cur_.kind == Token::Punct && cur_.text == ")")) {
            out.push_back(number());
            while (cur_.kind == Token::Punct && cur_.text == ",") {
                bump();
                out.push_back(number());
            }
        }
        expect_punct(")");
        return out;
    }

    template <typename F>
    void parse_block(F&& handle_key) {
        while (!(cur_.kind == Token::Punct && cur_.text == "}")) {
            Token key = expect(Token::Ident, "key");
            expect_punct("=");
            if (!handle_key(key.text))
                throw ParseError(key.line, key.col, "unknown key '" + key.text + "'");
        }
    }

    void parse_orb(OrbSpec& o) {
        parse_block([&](const std::string& k) {
            if (k == "center_cm") o.center = vec3();
            else if (k == "radius_cm") o.radius = number();
            else if (k == "solid") o.solid = boolean();
            else if (k == "thickness_cm") o.thickness = number();
            else if (k == "thickness_mm") o.thickness = number() / 10.0;
            else if (k == "material") o.material = expect(Token::Ident, "material name").text;
            else if (k == "ior") o.ior = number();
            else if (k == "tint") o.tint = rgb();
            else if (k == "absorption_per_cm") o.absorption_per_cm = rgb();
            else if (k == "lateral_shift_cm") o.lateral_shift = number();
            else if (k == "enabled") o.enabled = boolean();
            else return false;
            return true;
        });
    }

    void parse_camera(CameraSpec& c) {
        parse_block([&](const std::string& k) {
            if (k == "position_cm") c.position = vec3();
            else if (k == "look_at_cm") c.look_at = vec3();
            else if (k == "vertical_fov_deg") c.vertical_fov_deg = number();
            else if (k == "width_px") c.width = static_cast<int>(number());
            else if (k == "height_px") c.height = static_cast<int>(number());
            else if (k == "projection") c.projection = expect(Token::Ident, "projection").text;
            else if (k == "ortho_width_cm") c.ortho_width = number();
            else return false;
            return true;
        });
    }

    void parse_lights(LightRig& l) {
        parse_block([&](const std::string& k) {
            if (k == "main_direction") l.main_direction = vec3();
            else if (k == "cone_count") l.cone_count = static_cast<int>(number());
            else if (k == "cone_half_angle_deg") l.cone_half_angle_deg = number();
            else if (k == "main_radiance") l.main_radiance = rgb();
            else if (k == "ambient_radiance") l.ambient_radiance = rgb();
            else return false;
            return true;
        });
    }

    void parse_relief(SceneConfig& cfg) {
        cfg.background = "folds";
        ReliefSpec& r = cfg.relief;
        parse_block([&](const std::string& k) {
            if (k == "distance_cm") r.distance = number();
            else if (k == "half_size_cm") r.half_size = number();
            else if (k == "mesh_resolution") r.mesh_resolution = static_cast<int>(number());
            else if (k == "convergence_cm") {
                auto v = number_list();
                if (v.size() != 2) throw ConfigError("convergence_cm needs 2 values");
                r.convergence = {v[0], v[1]};
            } else if (k == "fold_azimuths_deg") r.fold_azimuths_deg = number_list();
            else if (k == "fold_half_angle_deg") r.fold_half_angle_deg = number();
            else if (k == "fold_min_half_width_cm") r.fold_min_half_width = number();
            else if (k == "fold_height_cm") r.fold_height = number();
            else if (k == "straight_radius_cm") r.straight_radius = number();
            else if (k == "curve_radius_cm") r.curve_radius = number();
            else if (k == "exempt_azimuth_deg") r.exempt_azimuth_deg = number();
            else if (k == "exempt_offset_cm") r.exempt_offset = number();
            else if (k == "exempt_shadow_scale") r.exempt_shadow_scale = number();
            else if (k == "base_albedo") r.base_albedo = number();
            else if (k == "stripe_contrast") r.stripe_contrast = number();
            else if (k == "stripe_period_deg") r.stripe_period_deg = number();
            else if (k == "stripe_phase_deg") r.stripe_phase_deg = number();
            else if (k == "fold_albedo") r.fold_albedo = number();
            else if (k == "far_albedo") r.far_albedo = number();
            else if (k == "far_radius_cm") r.far_radius = number();
            else if (k == "dot_albedo") r.dot_albedo = number();
            else if (k == "dot_radius_cm") r.dot_radius = number();
            else if (k == "texture") r.texture = string_value();
            else return false;
            return true;
        });
    }

    void parse_lines(SceneConfig& cfg) {
        cfg.background = "lines";
        LinesSpec& l = cfg.lines;
        parse_block([&](const std::string& k) {
            if (k == "spacing_cm") l.spacing = number();
            else if (k == "line_width_cm") l.line_width = number();
            else if (k == "line_albedo") l.line_albedo = number();
            else if (k == "plane_albedo") l.plane_albedo = number();
            else if (k == "bend_deg") l.bend_deg = number();
            else if (k == "bend_start_cm") l.bend_start = number();
            else return false;
            return true;
        });
    }

    void parse_background(SceneConfig& cfg) {
        parse_block([&](const std::string& k) {
            if (k == "kind") {
                Token t = expect(Token::Ident, "background kind");
                if (t.text != "folds" && t.text != "lines" && t.text != "none")
                    throw ParseError(t.line, t.col,
                                     "background kind must be folds, lines or none");
                cfg.background = t.text;
            } else {
                return false;
            }
            return true;
        });
    }

    void parse_mesh(SceneConfig& cfg) {
        MeshInstanceSpec m;
        parse_block([&](const std::string& k) {
            if (k == "path") m.path = string_value();
            else if (k == "offset_cm") m.offset = vec3();
            else if (k == "scale") m.scale = number();
            else if (k == "albedo") m.albedo = number();
            else return false;
            return true;
        });
        cfg.meshes.push_back(m);
    }

    void parse_render(RenderSettings& r) {
        parse_block([&](const std::string& k) {
            if (k == "spp") r.samples_per_pixel = static_cast<int>(number());
            else if (k == "max_depth") r.max_depth = static_cast<int>(number());
            else if (k == "seed") r.seed = integer64();
            else if (k == "gamma") r.gamma = number();
            else if (k == "threads") r.threads = static_cast<int>(number());
            else if (k == "strict") r.strict = boolean();
            else return false;
            return true;
        });
    }
};

inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
inline std::string fmt_vec(const Vec3& v) {
    return "(" + fmt_num(v.x) + ", " + fmt_num(v.y) + ", " + fmt_num(v.z) + ")";
}
inline std::string fmt_rgb(const RGB& c) {
    return "(" + fmt_num(c.r) + ", " + fmt_num(c.g) + ", " + fmt_num(c.b) + ")";
}

}  // namespace detail_fmt

inline SceneConfig parse_scene(std::string_view text) {
    return detail_fmt::Parser(text).parse();
}

// Dotted-path override mirroring the scene format's nesting, e.g.
// "orb.thickness_mm" = "1.3". Validation is deferred to the caller so a
// sequence of overrides may pass through intermediate states.
inline void apply_scene_override(SceneConfig& cfg, const std::string& dotted_key,
                                 const std::string& value) {
    auto dot = dotted_key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 >= dotted_key.size())
        throw ConfigError("override key must be block.key, got '" + dotted_key + "'");
    std::string text = dotted_key.substr(0, dot) + " { " + dotted_key.substr(dot + 1) + " = " +
                       value + " }";
    detail_fmt::Parser parser(text);
    parser.parse_into(cfg, false);
}

// Canonical form: every key emitted, fixed order, centimeter units, full
// double precision. parse(serialize(cfg)) reproduces cfg exactly.
inline std::string serialize_scene(const SceneConfig& cfg) {
    using namespace detail_fmt;
    std::ostringstream out;
    const auto& o = cfg.orb;
    out << "orb {\n"
        << "  center_cm = " << fmt_vec(o.center) << "\n"
        << "  radius_cm = " << fmt_num(o.radius) << "\n"
        << "  solid = " << (o.solid ? "true" : "false") << "\n"
        << "  thickness_cm = " << fmt_num(o.thickness) << "\n"
        << "  material = " << o.material << "\n"
        << "  ior = " << fmt_num(o.ior) << "\n"
        << "  tint = " << fmt_rgb(o.tint) << "\n"
        << "  absorption_per_cm = " << fmt_rgb(o.absorption_per_cm) << "\n"
        << "  lateral_shift_cm = " << fmt_num(o.lateral_shift) << "\n"
        << "  enabled = " << (o.enabled ? "true" : "false") << "\n"
        << "}\n";
    const auto& c = cfg.camera;
    out << "camera {\n"
        << "  position_cm = " << fmt_vec(c.position) << "\n"
        << "  look_at_cm = " << fmt_vec(c.look_at) << "\n"
        << "  vertical_fov_deg = " << fmt_num(c.vertical_fov_deg) << "\n"
        << "  width_px = " << c.width << "\n"
        << "  height_px = " << c.height << "\n"
        << "  projection = " << c.projection << "\n"
        << "  ortho_width_cm = " << fmt_num(c.ortho_width) << "\n"
        << "}\n";
    const auto& l = cfg.lights;
    out << "lights {\n"
        << "  main_direction = " << fmt_vec(l.main_direction) << "\n"
        << "  cone_count = " << l.cone_count << "\n"
        << "  cone_half_angle_deg = " << fmt_num(l.cone_half_angle_deg) << "\n"
        << "  main_radiance = " << fmt_rgb(l.main_radiance) << "\n"
        << "  ambient_radiance = " << fmt_rgb(l.ambient_radiance) << "\n"
        << "}\n";
    if (cfg.background == "folds") {
        const auto& r = cfg.relief;
        out << "relief {\n"
            << "  distance_cm = " << fmt_num(r.distance) << "\n"
            << "  half_size_cm = " << fmt_num(r.half_size) << "\n"
            << "  mesh_resolution = " << r.mesh_resolution << "\n"
            << "  convergence_cm = (" << fmt_num(r.convergence.x) << ", "
            << fmt_num(r.convergence.y) << ")\n"
            << "  fold_azimuths_deg = (";
        for (size_t i = 0; i < r.fold_azimuths_deg.size(); ++i)
            out << (i ? ", " : "") << fmt_num(r.fold_azimuths_deg[i]);
        out << ")\n"
            << "  fold_half_angle_deg = " << fmt_num(r.fold_half_angle_deg) << "\n"
            << "  fold_min_half_width_cm = " << fmt_num(r.fold_min_half_width) << "\n"
            << "  fold_height_cm = " << fmt_num(r.fold_height) << "\n"
            << "  straight_radius_cm = " << fmt_num(r.straight_radius) << "\n"
            << "  curve_radius_cm = " << fmt_num(r.curve_radius) << "\n"
            << "  exempt_azimuth_deg = " << fmt_num(r.exempt_azimuth_deg) << "\n"
            << "  exempt_offset_cm = " << fmt_num(r.exempt_offset) << "\n"
            << "  exempt_shadow_scale = " << fmt_num(r.exempt_shadow_scale) << "\n"
            << "  base_albedo = " << fmt_num(r.base_albedo) << "\n"
            << "  stripe_contrast = " << fmt_num(r.stripe_contrast) << "\n"
            << "  stripe_period_deg = " << fmt_num(r.stripe_period_deg) << "\n"
            << "  stripe_phase_deg = " << fmt_num(r.stripe_phase_deg) << "\n"
            << "  fold_albedo = " << fmt_num(r.fold_albedo) << "\n"
            << "  far_albedo = " << fmt_num(r.far_albedo) << "\n"
            << "  far_radius_cm = " << fmt_num(r.far_radius) << "\n"
            << "  dot_albedo = " << fmt_num(r.dot_albedo) << "\n"
            << "  dot_radius_cm = " << fmt_num(r.dot_radius) << "\n"
            << "  texture = \"" << r.texture << "\"\n"
            << "}\n";
    } else if (cfg.background == "lines") {
        const auto& li = cfg.lines;
        out << "lines {\n"
            << "  spacing_cm = " << fmt_num(li.spacing) << "\n"
            << "  line_width_cm = " << fmt_num(li.line_width) << "\n"
            << "  line_albedo = " << fmt_num(li.line_albedo) << "\n"
            << "  plane_albedo = " << fmt_num(li.plane_albedo) << "\n"
            << "  bend_deg = " << fmt_num(li.bend_deg) << "\n"
            << "  bend_start_cm = " << fmt_num(li.bend_start) << "\n"
            << "}\n";
    } else {
        out << "background {\n  kind = none\n}\n";
    }
    for (const auto& m : cfg.meshes) {
        out << "mesh {\n"
            << "  path = \"" << m.path << "\"\n"
            << "  offset_cm = " << fmt_vec(m.offset) << "\n"
            << "  scale = " << fmt_num(m.scale) << "\n"
            << "  albedo = " << fmt_num(m.albedo) << "\n"
            << "}\n";
    }
    const auto& rs = cfg.render;
    out << "render {\n"
        << "  spp = " << rs.samples_per_pixel << "\n"
        << "  max_depth = " << rs.max_depth << "\n"
        << "  seed = " << rs.seed << "\n"
        << "  gamma = " << fmt_num(rs.gamma) << "\n"
        << "  threads = " << rs.threads << "\n"
        << "  strict = " << (rs.strict ? "true" : "false") << "\n"
        << "}\n";
    return out.str();
}

}  // namespace orb
