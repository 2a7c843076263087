#include "brw/model_io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace brw {

namespace {

struct RawModel {
    std::vector<JumpEntry> jump;
    std::vector<std::pair<int, double>> offspring;
    std::string mode;
    std::string label;
    bool has_jump = false, has_offspring = false, has_mode = false;
};

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

RawModel parse_raw(std::istream& in) {
    RawModel raw;
    std::string line;
    int lineno = 0;
    enum class Section { none, jump, offspring } section = Section::none;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string body = strip(line);
        if (body.empty()) continue;
        const int col = static_cast<int>(line.find_first_not_of(" \t")) + 1;

        std::istringstream ls(body);
        std::string head;
        ls >> head;
        if (head == "label") {
            std::string rest;
            std::getline(ls, rest);
            raw.label = strip(rest);
            section = Section::none;
            continue;
        }
        if (head == "mode") {
            ls >> raw.mode;
            raw.has_mode = true;
            section = Section::none;
            continue;
        }
        if (head == "jump") {
            section = Section::jump;
            raw.has_jump = true;
            continue;
        }
        if (head == "offspring") {
            section = Section::offspring;
            raw.has_offspring = true;
            continue;
        }
        // entry line: <int> <probability>
        if (section == Section::none)
            throw ParseError("unexpected token '" + head + "' outside any section", lineno, col);
        int key = 0;
        try {
            std::size_t used = 0;
            key = std::stoi(head, &used);
            if (used != head.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw ParseError("expected integer offset/count, got '" + head + "'", lineno, col);
        }
        std::string ptok;
        ls >> ptok;
        if (ptok.empty()) throw ParseError("missing probability after '" + head + "'", lineno, col);
        const double prob = parse_probability(ptok, lineno, col);
        std::string extra;
        if (ls >> extra) throw ParseError("trailing token '" + extra + "'", lineno, col);
        if (section == Section::jump) raw.jump.push_back({key, prob});
        else raw.offspring.emplace_back(key, prob);
    }
    return raw;
}

std::vector<std::string> raw_issues(const RawModel& raw) {
    std::vector<std::string> issues;
    if (!raw.has_jump || raw.jump.empty()) issues.push_back("missing jump section");
    if (!raw.has_offspring || raw.offspring.empty()) issues.push_back("missing offspring section");
    if (!raw.has_mode) issues.push_back("missing mode");
    else if (raw.mode != "subcritical" && raw.mode != "supercritical")
        issues.push_back("mode must be 'subcritical' or 'supercritical', got '" + raw.mode + "'");
    for (const auto& [k, p] : raw.offspring)
        if (k < 0) issues.push_back("offspring: negative count " + std::to_string(k));
    return issues;
}

std::vector<double> offspring_vector(const std::vector<std::pair<int, double>>& entries) {
    int maxk = 0;
    for (const auto& [k, p] : entries) maxk = std::max(maxk, k);
    std::vector<double> ps(maxk + 1, 0.0);
    for (const auto& [k, p] : entries)
        if (k >= 0) ps[k] += p;
    return ps;
}

ModelSpec assemble(const RawModel& raw) {
    auto issues = raw_issues(raw);
    if (!issues.empty()) throw ValidationError(std::move(issues));
    auto jump = JumpDistribution::create(raw.jump);
    auto off = OffspringDistribution::create(offspring_vector(raw.offspring));
    const Mode mode = raw.mode == "subcritical" ? Mode::subcritical : Mode::supercritical;
    return ModelSpec::create(std::move(jump), std::move(off), mode, raw.label);
}

}  // namespace

double parse_probability(const std::string& token, int line, int column) {
    try {
        if (auto slash = token.find('/'); slash != std::string::npos) {
            std::size_t u1 = 0, u2 = 0;
            const double num = std::stod(token.substr(0, slash), &u1);
            const double den = std::stod(token.substr(slash + 1), &u2);
            if (u1 != slash || u2 != token.size() - slash - 1) throw std::invalid_argument("");
            if (den == 0.0) throw ParseError("division by zero in '" + token + "'", line, column);
            return num / den;
        }
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument("");
        return v;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError("malformed probability '" + token + "'", line, column);
    }
}

ModelSpec load_model(std::istream& in) { return assemble(parse_raw(in)); }

ModelSpec load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file: " + path);
    return load_model(in);
}

std::vector<std::string> validate_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return {"cannot open model file: " + path};
    RawModel raw;
    try {
        raw = parse_raw(in);
    } catch (const ParseError& e) {
        return {e.what()};
    }
    std::vector<std::string> issues = raw_issues(raw);
    if (!issues.empty()) return issues;
    auto jump_issues = JumpDistribution::validate(raw.jump);
    issues.insert(issues.end(), jump_issues.begin(), jump_issues.end());
    const auto ps = offspring_vector(raw.offspring);
    auto off_issues = OffspringDistribution::validate(ps);
    issues.insert(issues.end(), off_issues.begin(), off_issues.end());
    if (issues.empty()) {
        try {
            assemble(raw);
        } catch (const ValidationError& e) {
            issues.insert(issues.end(), e.issues.begin(), e.issues.end());
        }
    }
    return issues;
}

void write_model_file(const ModelSpec& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write model file: " + path);
    out.precision(17);
    out << "label " << model.label << "\n";
    out << "mode " << (model.mode == Mode::subcritical ? "subcritical" : "supercritical") << "\n\n";
    out << "jump\n";
    for (const auto& e : model.jump.entries()) out << "  " << e.offset << "  " << e.prob << "\n";
    out << "\noffspring\n";
    const auto& p = model.offspring.probabilities();
    for (std::size_t k = 0; k < p.size(); ++k)
        if (p[k] > 0.0) out << "  " << k << "  " << p[k] << "\n";
}

}  // namespace brw
