#include "gridlaa/case.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace gridlaa {

std::string ParseError::annotate(const std::string& message, int line, int column) {
    if (line <= 0) return message;
    std::ostringstream os;
    os << "line " << line << ", column " << column << ": " << message;
    return os.str();
}

namespace {

// ---------------------------------------------------------------------------
// lexer

struct Token {
    enum Kind { word, number, punct, string, newline, eof };
    Kind kind = eof;
    std::string text;
    double value = 0.0;
    int line = 0;
    int col = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Token next() {
        skip_blank_and_comments();
        Token tok;
        tok.line = line_;
        tok.col = col_;
        if (pos_ >= text_.size()) {
            tok.kind = Token::eof;
            return tok;
        }
        char c = text_[pos_];
        if (c == '\n') {
            advance();
            tok.kind = Token::newline;
            return tok;
        }
        if (c == '\'') {
            advance();
            while (pos_ < text_.size() && text_[pos_] != '\'' && text_[pos_] != '\n') {
                tok.text.push_back(text_[pos_]);
                advance();
            }
            if (pos_ >= text_.size() || text_[pos_] != '\'')
                throw ParseError("unterminated string literal", tok.line, tok.col);
            advance();
            tok.kind = Token::string;
            return tok;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < text_.size()) {
                char d = text_[pos_];
                if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '.') {
                    tok.text.push_back(d);
                    advance();
                } else {
                    break;
                }
            }
            tok.kind = Token::word;
            return tok;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+') {
            size_t start = pos_;
            if (c == '-' || c == '+') advance();
            bool any_digit = false;
            while (pos_ < text_.size() &&
                   (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
                any_digit = any_digit || std::isdigit(static_cast<unsigned char>(text_[pos_]));
                advance();
            }
            if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
                advance();
                if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) advance();
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    advance();
            }
            tok.text = std::string(text_.substr(start, pos_ - start));
            if (!any_digit)
                throw ParseError("malformed number '" + tok.text + "'", tok.line, tok.col);
            char* end = nullptr;
            tok.value = std::strtod(tok.text.c_str(), &end);
            if (end != tok.text.c_str() + tok.text.size())
                throw ParseError("malformed number '" + tok.text + "'", tok.line, tok.col);
            tok.kind = Token::number;
            return tok;
        }
        if (c == '=' || c == '[' || c == ']' || c == ';' || c == ',') {
            tok.kind = Token::punct;
            tok.text.push_back(c);
            advance();
            return tok;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_blank_and_comments() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ' ' || c == '\t' || c == '\r') {
                advance();
            } else if (c == '%') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else {
                break;
            }
        }
    }

    std::string_view text_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

// ---------------------------------------------------------------------------
// raw matrices

struct RawMatrix {
    std::vector<std::vector<Token>> rows;
};

class CaseReader {
public:
    explicit CaseReader(std::string_view text) : lexer_(text) { bump(); }

    void run() {
        while (cur_.kind != Token::eof) {
            if (cur_.kind == Token::newline) {
                bump();
                continue;
            }
            if (cur_.kind == Token::word && cur_.text == "function") {
                skip_to_newline();
                continue;
            }
            if (cur_.kind == Token::word) {
                read_assignment();
                continue;
            }
            throw ParseError("expected assignment, got '" + cur_.text + "'", cur_.line, cur_.col);
        }
    }

    std::optional<double> base_mva;
    std::map<std::string, RawMatrix> matrices;
    std::vector<std::string> warnings;

private:
    void bump() { cur_ = lexer_.next(); }

    void skip_to_newline() {
        while (cur_.kind != Token::newline && cur_.kind != Token::eof) bump();
    }

    void expect_punct(char c) {
        if (cur_.kind != Token::punct || cur_.text[0] != c)
            throw ParseError(std::string("expected '") + c + "'", cur_.line, cur_.col);
        bump();
    }

    void read_assignment() {
        std::string name = cur_.text;
        bump();
        while (cur_.kind == Token::newline) bump();
        expect_punct('=');
        while (cur_.kind == Token::newline) bump();
        if (cur_.kind == Token::number) {
            if (name == "mpc.baseMVA") base_mva = cur_.value;
            bump();
        } else if (cur_.kind == Token::string) {
            bump();  // version tag and friends
        } else if (cur_.kind == Token::punct && cur_.text == "[") {
            bump();
            RawMatrix m = read_matrix();
            if (name == "mpc.bus" || name == "mpc.gen" || name == "mpc.branch") {
                matrices[name] = std::move(m);
            } else {
                warnings.push_back("ignored field " + name);
            }
        } else {
            throw ParseError("expected value for " + name, cur_.line, cur_.col);
        }
        if (cur_.kind == Token::punct && cur_.text == ";") bump();
    }

    RawMatrix read_matrix() {
        RawMatrix m;
        std::vector<Token> row;
        auto flush = [&] {
            if (!row.empty()) {
                m.rows.push_back(row);
                row.clear();
            }
        };
        while (true) {
            if (cur_.kind == Token::eof)
                throw ParseError("unterminated matrix", cur_.line, cur_.col);
            if (cur_.kind == Token::punct && cur_.text == "]") {
                flush();
                bump();
                return m;
            }
            if (cur_.kind == Token::newline || (cur_.kind == Token::punct && cur_.text == ";")) {
                flush();
                bump();
                continue;
            }
            if (cur_.kind == Token::punct && cur_.text == ",") {
                bump();
                continue;
            }
            if (cur_.kind != Token::number)
                throw ParseError("expected number in matrix, got '" + cur_.text + "'",
                                 cur_.line, cur_.col);
            row.push_back(cur_);
            bump();
        }
    }

    Lexer lexer_;
    Token cur_;
};

double cell(const std::vector<Token>& row, size_t idx) { return row[idx].value; }

int int_cell(const std::vector<Token>& row, size_t idx, const char* what) {
    double v = row[idx].value;
    double r = std::round(v);
    if (std::abs(v - r) > 1e-9 || r < -2e9 || r > 2e9)
        throw ParseError(std::string("expected integer ") + what + ", got '" + row[idx].text + "'",
                         row[idx].line, row[idx].col);
    return static_cast<int>(r);
}

void require_width(const std::vector<Token>& row, size_t width, const char* table) {
    if (row.size() < width) {
        const Token& t = row.front();
        std::ostringstream os;
        os << table << " row has " << row.size() << " columns, need at least " << width;
        throw ParseError(os.str(), t.line, t.col);
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

int GridCase::n_gen() const {
    return static_cast<int>(generators.size());
}

BusIndex GridCase::index_of(int bus_id) const {
    for (int i = 0; i < n_bus(); ++i)
        if (buses[i].id == bus_id) return i;
    throw ValidationError("unknown bus id " + std::to_string(bus_id));
}

int GridCase::gen_position(int bus_id) const {
    BusIndex i = index_of(bus_id);
    if (buses[i].kind != BusKind::generator)
        throw ValidationError("bus " + std::to_string(bus_id) + " is not a generator bus");
    return i;
}

int GridCase::load_position(int bus_id) const {
    BusIndex i = index_of(bus_id);
    if (buses[i].kind != BusKind::load)
        throw ValidationError("bus " + std::to_string(bus_id) + " is not a load bus");
    return i - n_gen();
}

ParsedCase parse_case(std::string_view text, std::string_view name) {
    CaseReader reader(text);
    reader.run();

    if (!reader.base_mva) throw ParseError("missing mpc.baseMVA");
    for (const char* table : {"mpc.bus", "mpc.gen", "mpc.branch"})
        if (!reader.matrices.count(table))
            throw ParseError(std::string("missing ") + table + " matrix");

    ParsedCase out;
    out.warnings = std::move(reader.warnings);
    GridCase& g = out.grid;
    g.name = std::string(name);
    g.base_mva = *reader.base_mva;
    if (g.base_mva <= 0) throw ValidationError("baseMVA must be positive");

    struct RawBus {
        int id;
        double demand_pu;
        double base_kv;
    };
    std::map<int, RawBus> bus_by_id;
    for (const auto& row : reader.matrices["mpc.bus"].rows) {
        require_width(row, 13, "bus");
        RawBus b;
        b.id = int_cell(row, 0, "bus id");
        if (b.id <= 0)
            throw ParseError("bus id must be positive", row[0].line, row[0].col);
        b.demand_pu = cell(row, 2) / g.base_mva;
        b.base_kv = cell(row, 9);
        if (!bus_by_id.emplace(b.id, b).second)
            throw ValidationError("duplicate bus id " + std::to_string(b.id));
        if (b.demand_pu < 0)
            out.warnings.push_back("bus " + std::to_string(b.id) + " has negative demand");
    }
    if (bus_by_id.empty()) throw ValidationError("case has no buses");

    std::set<int> gen_buses;
    std::vector<GenRecord> gens;
    for (const auto& row : reader.matrices["mpc.gen"].rows) {
        require_width(row, 10, "gen");
        GenRecord r;
        r.bus = int_cell(row, 0, "generator bus");
        r.in_service = cell(row, 7) > 0;
        r.capacity_pu = cell(row, 8) / g.base_mva;
        if (!bus_by_id.count(r.bus))
            throw ValidationError("generator references unknown bus " + std::to_string(r.bus));
        gens.push_back(r);
        if (r.in_service) gen_buses.insert(r.bus);
    }
    std::stable_sort(gens.begin(), gens.end(),
                     [](const GenRecord& a, const GenRecord& b) { return a.bus < b.bus; });
    g.generators = std::move(gens);

    for (const auto& row : reader.matrices["mpc.branch"].rows) {
        require_width(row, 11, "branch");
        BranchRecord r;
        r.from = int_cell(row, 0, "branch from-bus");
        r.to = int_cell(row, 1, "branch to-bus");
        r.reactance = cell(row, 3);
        r.in_service = cell(row, 10) > 0;
        if (!bus_by_id.count(r.from))
            throw ValidationError("branch references unknown bus " + std::to_string(r.from));
        if (!bus_by_id.count(r.to))
            throw ValidationError("branch references unknown bus " + std::to_string(r.to));
        if (r.from == r.to)
            throw ValidationError("branch connects bus " + std::to_string(r.from) + " to itself");
        if (r.reactance <= 0)
            throw ValidationError("branch " + std::to_string(r.from) + "-" + std::to_string(r.to) +
                                  " has nonpositive reactance");
        g.branches.push_back(r);
    }

    // canonical bus order: generator buses then load buses, ascending ids
    for (const auto& [id, raw] : bus_by_id) {
        if (!gen_buses.count(id)) continue;
        BusRecord b;
        b.id = id;
        b.kind = BusKind::generator;
        b.demand_pu = raw.demand_pu;
        b.base_kv = raw.base_kv;
        g.buses.push_back(b);
        if (raw.demand_pu != 0.0)
            out.warnings.push_back("dropping " + fmt9(raw.demand_pu * g.base_mva) +
                                   " MW demand at generator bus " + std::to_string(id));
    }
    for (const auto& [id, raw] : bus_by_id) {
        if (gen_buses.count(id)) continue;
        BusRecord b;
        b.id = id;
        b.kind = BusKind::load;
        b.demand_pu = raw.demand_pu;
        b.base_kv = raw.base_kv;
        g.buses.push_back(b);
        LoadRecord l;
        l.bus = id;
        l.demand_pu = raw.demand_pu;
        g.loads.push_back(l);
    }
    if (g.n_gen() == 0) throw ValidationError("case has no in-service generators");
    if (g.n_load() == 0) throw ValidationError("case has no load buses");

    // connectivity over in-service branches
    std::map<int, int> comp;
    for (const auto& [id, raw] : bus_by_id) comp[id] = id;
    std::function<int(int)> find = [&](int x) {
        while (comp[x] != x) x = comp[x] = comp[comp[x]];
        return x;
    };
    for (const auto& b : g.branches)
        if (b.in_service) comp[find(b.from)] = find(b.to);
    int root = find(g.buses.front().id);
    for (const auto& b : g.buses)
        if (find(b.id) != root)
            throw ValidationError("bus " + std::to_string(b.id) +
                                  " is disconnected from the in-service network");
    return out;
}

std::string serialize_case(const GridCase& g) {
    std::ostringstream os;
    os << "function mpc = " << (g.name.empty() ? "case" : g.name) << "\n";
    os << "mpc.version = '2';\n";
    os << "mpc.baseMVA = " << fmt(g.base_mva) << ";\n\n";

    os << "%% bus_i type Pd Qd Gs Bs area Vm Va baseKV zone Vmax Vmin\n";
    os << "mpc.bus = [\n";
    bool first_gen = true;
    for (const auto& b : g.buses) {
        int type = 1;
        if (b.kind == BusKind::generator) {
            type = first_gen ? 3 : 2;
            first_gen = false;
        }
        os << "\t" << b.id << "\t" << type << "\t" << fmt(b.demand_pu * g.base_mva)
           << "\t0\t0\t0\t1\t1\t0\t" << fmt(b.base_kv) << "\t1\t1.1\t0.9;\n";
    }
    os << "];\n\n";

    os << "%% bus Pg Qg Qmax Qmin Vg mBase status Pmax Pmin\n";
    os << "mpc.gen = [\n";
    for (const auto& r : g.generators) {
        os << "\t" << r.bus << "\t0\t0\t0\t0\t1\t" << fmt(g.base_mva) << "\t"
           << (r.in_service ? 1 : 0) << "\t" << fmt(r.capacity_pu * g.base_mva) << "\t0;\n";
    }
    os << "];\n\n";

    os << "%% fbus tbus r x b rateA rateB rateC ratio angle status angmin angmax\n";
    os << "mpc.branch = [\n";
    for (const auto& r : g.branches) {
        os << "\t" << r.from << "\t" << r.to << "\t0\t" << fmt(r.reactance)
           << "\t0\t0\t0\t0\t0\t0\t" << (r.in_service ? 1 : 0) << "\t-360\t360;\n";
    }
    os << "];\n";
    return os.str();
}

}  // namespace gridlaa
