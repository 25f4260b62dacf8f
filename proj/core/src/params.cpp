#include "gridlaa/params.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "gridlaa/errors.hpp"

namespace gridlaa {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

enum class Key {
    omega_nom,
    omega_max,
    inertia,
    gen_damping,
    load_damping,
    kp,
    ki,
    vulnerable_fraction,
};

const std::map<std::string_view, Key> kKeyNames = {
    {"omega_nom", Key::omega_nom},
    {"omega_max", Key::omega_max},
    {"inertia", Key::inertia},
    {"gen_damping", Key::gen_damping},
    {"load_damping", Key::load_damping},
    {"kp", Key::kp},
    {"ki", Key::ki},
    {"vulnerable_fraction", Key::vulnerable_fraction},
};

bool generator_key(Key k) {
    return k == Key::inertia || k == Key::gen_damping || k == Key::kp || k == Key::ki;
}

bool load_key(Key k) {
    return k == Key::load_damping || k == Key::vulnerable_fraction;
}

double parse_value(std::string_view text, int line, int col) {
    std::string buf(text);
    char* end = nullptr;
    double v = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size() || buf.empty())
        throw ParseError("malformed value '" + buf + "'", line, col);
    return v;
}

}  // namespace

DynamicParams load_dynamic_params(std::string_view text, GridCase& grid) {
    std::map<Key, double> defaults;
    std::map<std::pair<int, Key>, double> per_bus;

    int line_no = 0;
    int scope_bus = 0;  // 0 = global scope
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view raw = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                              : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        std::string_view line = raw;
        if (size_t hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError("unterminated section header", line_no, 1);
            std::string_view inner = trim(line.substr(1, line.size() - 2));
            if (inner.substr(0, 3) != "bus")
                throw ParseError("expected [bus <id>] section", line_no, 1);
            std::string_view id_text = trim(inner.substr(3));
            double id = parse_value(id_text, line_no, 1);
            if (id != std::floor(id) || id <= 0)
                throw ParseError("bus id must be a positive integer", line_no, 1);
            scope_bus = static_cast<int>(id);
            grid.index_of(scope_bus);  // throws on unknown buses
            continue;
        }

        size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError("expected key = value", line_no, 1);
        std::string_view key_text = trim(line.substr(0, eq));
        std::string_view val_text = trim(line.substr(eq + 1));
        auto it = kKeyNames.find(key_text);
        if (it == kKeyNames.end())
            throw ParseError("unknown key '" + std::string(key_text) + "'", line_no, 1);
        Key key = it->second;
        double value = parse_value(val_text, line_no, static_cast<int>(eq + 2));

        if (scope_bus == 0) {
            defaults[key] = value;
        } else {
            if (key == Key::omega_nom || key == Key::omega_max)
                throw ParseError("frequency limits cannot be set per bus", line_no, 1);
            BusKind kind = grid.buses[grid.index_of(scope_bus)].kind;
            if (generator_key(key) && kind != BusKind::generator)
                throw ParseError("generator key on load bus " + std::to_string(scope_bus),
                                 line_no, 1);
            if (load_key(key) && kind != BusKind::load)
                throw ParseError("load key on generator bus " + std::to_string(scope_bus),
                                 line_no, 1);
            per_bus[{scope_bus, key}] = value;
        }
    }

    DynamicParams p;
    const int ng = grid.n_gen();
    const int nl = grid.n_load();
    p.inertia.resize(ng);
    p.gen_damping.resize(ng);
    p.kp.resize(ng);
    p.ki.resize(ng);
    p.load_damping.resize(nl);

    auto fetch = [&](int bus, Key key) -> double {
        if (auto it = per_bus.find({bus, key}); it != per_bus.end()) return it->second;
        if (auto it = defaults.find(key); it != defaults.end()) return it->second;
        std::string name;
        for (const auto& [n, k] : kKeyNames)
            if (k == key) name = std::string(n);
        throw ValidationError("no value for " + name + " at bus " + std::to_string(bus) +
                              " and no global default");
    };

    if (auto it = defaults.find(Key::omega_nom); it != defaults.end()) p.omega_nom_hz = it->second;
    if (auto it = defaults.find(Key::omega_max); it != defaults.end()) p.omega_max_hz = it->second;

    for (int i = 0; i < ng; ++i) {
        int bus = grid.buses[i].id;
        p.inertia[i] = fetch(bus, Key::inertia);
        p.gen_damping[i] = fetch(bus, Key::gen_damping);
        p.kp[i] = fetch(bus, Key::kp);
        p.ki[i] = fetch(bus, Key::ki);
    }
    for (int i = 0; i < nl; ++i) {
        int bus = grid.loads[i].bus;
        p.load_damping[i] = fetch(bus, Key::load_damping);
        double fraction = 1.0;
        if (auto it = per_bus.find({bus, Key::vulnerable_fraction}); it != per_bus.end())
            fraction = it->second;
        else if (auto jt = defaults.find(Key::vulnerable_fraction); jt != defaults.end())
            fraction = jt->second;
        if (fraction < 0.0 || fraction > 1.0)
            throw ValidationError("vulnerable_fraction at bus " + std::to_string(bus) +
                                  " must lie in [0, 1]");
        grid.loads[i].vulnerable_fraction = fraction;
    }

    validate_params(p, grid);
    return p;
}

void validate_params(const DynamicParams& p, const GridCase& grid) {
    const int ng = grid.n_gen();
    const int nl = grid.n_load();
    if (p.inertia.size() != ng || p.gen_damping.size() != ng || p.kp.size() != ng ||
        p.ki.size() != ng || p.load_damping.size() != nl)
        throw ValidationError("parameter vectors do not match the case dimensions");
    for (int i = 0; i < ng; ++i) {
        int bus = grid.buses[i].id;
        if (!(p.inertia[i] > 0))
            throw ValidationError("inertia must be positive at bus " + std::to_string(bus));
        if (!(p.gen_damping[i] > 0))
            throw ValidationError("gen_damping must be positive at bus " + std::to_string(bus));
        if (p.kp[i] < 0 || p.ki[i] < 0)
            throw ValidationError("governor gains must be nonnegative at bus " +
                                  std::to_string(bus));
    }
    for (int i = 0; i < nl; ++i) {
        if (!(p.load_damping[i] > 0))
            throw ValidationError("load_damping must be positive at bus " +
                                  std::to_string(grid.loads[i].bus));
    }
    if (!(p.omega_nom_hz > 0) || !(p.omega_max_hz > 0))
        throw ValidationError("omega_nom and omega_max must be positive");
}

}  // namespace gridlaa
