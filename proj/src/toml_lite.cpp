#include "cirsplit/toml_lite.hpp"

#include <cctype>
#include <sstream>

#include "cirsplit/errors.hpp"

namespace cirsplit {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Remove a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

nlohmann::json parse_scalar(const std::string& token) {
    if (token.size() >= 2 && token.front() == '"' && token.back() == '"')
        return token.substr(1, token.size() - 2);
    if (token == "true") return true;
    if (token == "false") return false;
    try {
        std::size_t used = 0;
        if (token.find_first_of(".eE") == std::string::npos) {
            const long long v = std::stoll(token, &used);
            if (used == token.size()) return v;
        }
        const double v = std::stod(token, &used);
        if (used == token.size()) return v;
    } catch (...) {
    }
    throw config_error("TOML value not understood: '" + token + "'");
}

nlohmann::json parse_value(const std::string& token) {
    if (!token.empty() && token.front() == '[') {
        if (token.back() != ']') throw config_error("unterminated TOML array");
        nlohmann::json arr = nlohmann::json::array();
        std::string inner = token.substr(1, token.size() - 2);
        std::string cur;
        bool in_string = false;
        for (char c : inner) {
            if (c == '"') in_string = !in_string;
            if (c == ',' && !in_string) {
                if (!trim(cur).empty()) arr.push_back(parse_scalar(trim(cur)));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!trim(cur).empty()) arr.push_back(parse_scalar(trim(cur)));
        return arr;
    }
    return parse_scalar(token);
}

} // namespace

nlohmann::json parse_toml_lite(const std::string& text) {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* current = &root;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("TOML line " + std::to_string(line_no) + ": bad table header");
            const std::string path = trim(line.substr(1, line.size() - 2));
            if (path.empty())
                throw config_error("TOML line " + std::to_string(line_no) + ": empty table header");
            current = &root;
            std::string part;
            std::istringstream ps(path);
            while (std::getline(ps, part, '.')) {
                part = trim(part);
                if (part.empty())
                    throw config_error("TOML line " + std::to_string(line_no) + ": empty table name");
                current = &(*current)[part];
                if (!current->is_object() && !current->is_null())
                    throw config_error("TOML line " + std::to_string(line_no) + ": table clashes with value");
                if (current->is_null()) *current = nlohmann::json::object();
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("TOML line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw config_error("TOML line " + std::to_string(line_no) + ": empty key or value");
        (*current)[key] = parse_value(value);
    }
    return root;
}

} // namespace cirsplit
