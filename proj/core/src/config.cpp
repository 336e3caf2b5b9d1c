#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "fbmc/errors.hpp"
#include "fbmc/simulation.hpp"

namespace fbmc {

namespace {

std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        auto item = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (!item.empty()) parts.push_back(std::move(item));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const auto* first = value.data();
    const auto* last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) throw ConfigError("invalid value for " + key + ": '" + value + "'");
    return out;
}

std::string join_numbers(const std::vector<double>& values) {
    std::ostringstream out;
    for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << values[i];
    return out.str();
}

}  // namespace

std::string_view design_name(Design d) noexcept {
    switch (d) {
        case Design::linear_ul: return "linear-ul";
        case Design::linear_dl_sum: return "linear-dl-sum";
        case Design::linear_dl_sc: return "linear-dl-sc";
        case Design::dfe_ul: return "dfe-ul";
        case Design::thp_sum: return "thp-sum";
        case Design::thp_sc: return "thp-sc";
    }
    return "unknown";
}

const std::vector<Design>& all_designs() {
    static const std::vector<Design> designs{Design::linear_ul, Design::linear_dl_sum, Design::linear_dl_sc,
                                             Design::dfe_ul,    Design::thp_sum,       Design::thp_sc};
    return designs;
}

Design parse_design(std::string_view name) {
    for (const auto d : all_designs()) {
        if (design_name(d) == name) return d;
    }
    throw ConfigError("unknown design '" + std::string(name) + "'");
}

std::vector<Design> parse_design_list(std::string_view list) {
    std::vector<Design> designs;
    for (const auto& item : split(list, ',')) designs.push_back(parse_design(item));
    if (designs.empty()) throw ConfigError("design list is empty");
    return designs;
}

void SimConfig::validate() const {
    if (subcarriers < 2 || (subcarriers & (subcarriers - 1)) != 0) throw ConfigError("M must be a power of two");
    if (used_subcarriers < 1 || used_subcarriers > subcarriers) throw ConfigError("M_u must lie in [1, M]");
    if (overlap < 1) throw ConfigError("K must be >= 1");
    if (ff_taps < 1 || linear_taps < 1) throw ConfigError("filter lengths must be >= 1");
    if (channel_length < 1) throw ConfigError("L_ch must be >= 1");
    if (block_length < 1 || channels < 1) throw ConfigError("block length and channel count must be >= 1");
    if (ebn0_db.empty()) throw ConfigError("Eb/N0 grid is empty");
    if (designs.empty()) throw ConfigError("design list is empty");
    if (channel_profile != "bu") throw ConfigError("unknown channel profile '" + channel_profile + "'");
    if (tau && !(*tau > 0.0)) throw ConfigError("tau must be positive");
    if (parallel < 1) throw ConfigError("parallel must be >= 1");
}

std::string SimConfig::to_text() const {
    std::ostringstream out;
    out.precision(17);
    out << "M = " << subcarriers << '\n'
        << "M_u = " << used_subcarriers << '\n'
        << "K = " << overlap << '\n'
        << "rolloff = " << rolloff << '\n'
        << "Q = " << qam_order << '\n'
        << "L_f = " << ff_taps << '\n'
        << "L_b = " << fb_taps << '\n'
        << "L_lin = " << linear_taps << '\n'
        << "nu = " << (latency ? std::to_string(*latency) : std::string("auto")) << '\n';
    out << "tau = ";
    if (tau) out << *tau; else out << "auto";
    out << '\n'
        << "fs_hz = " << sample_rate_hz << '\n'
        << "L_ch = " << channel_length << '\n'
        << "channel_profile = " << channel_profile << '\n'
        << "ebn0_db = " << join_numbers(ebn0_db) << '\n'
        << "block_length = " << block_length << '\n'
        << "channels = " << channels << '\n'
        << "seed = " << seed << '\n';
    out << "designs = ";
    for (std::size_t i = 0; i < designs.size(); ++i) out << (i ? "," : "") << design_name(designs[i]);
    out << '\n' << "output = " << output.string() << '\n';
    return out.str();
}

SimConfig parse_config(std::istream& in) {
    SimConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto text = trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const auto key = trim(std::string_view(text).substr(0, eq));
        const auto value = trim(std::string_view(text).substr(eq + 1));

        if (key == "M") cfg.subcarriers = parse_number<std::size_t>(key, value);
        else if (key == "M_u") cfg.used_subcarriers = parse_number<std::size_t>(key, value);
        else if (key == "K") cfg.overlap = parse_number<std::size_t>(key, value);
        else if (key == "rolloff") cfg.rolloff = parse_number<double>(key, value);
        else if (key == "Q") cfg.qam_order = parse_number<int>(key, value);
        else if (key == "L_f") cfg.ff_taps = parse_number<std::size_t>(key, value);
        else if (key == "L_b") cfg.fb_taps = parse_number<std::size_t>(key, value);
        else if (key == "L_lin") cfg.linear_taps = parse_number<std::size_t>(key, value);
        else if (key == "nu") {
            if (value == "auto") cfg.latency.reset();
            else cfg.latency = parse_number<std::size_t>(key, value);
        } else if (key == "tau") {
            if (value == "auto") cfg.tau.reset();
            else cfg.tau = parse_number<double>(key, value);
        } else if (key == "fs_hz") cfg.sample_rate_hz = parse_number<double>(key, value);
        else if (key == "L_ch") cfg.channel_length = parse_number<std::size_t>(key, value);
        else if (key == "channel_profile") cfg.channel_profile = value;
        else if (key == "ebn0_db") {
            cfg.ebn0_db.clear();
            for (const auto& item : split(value, ',')) cfg.ebn0_db.push_back(parse_number<double>(key, item));
        } else if (key == "block_length") cfg.block_length = parse_number<std::size_t>(key, value);
        else if (key == "channels") cfg.channels = parse_number<std::size_t>(key, value);
        else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
        else if (key == "designs") cfg.designs = parse_design_list(value);
        else if (key == "output") cfg.output = value;
        else if (key == "parallel") cfg.parallel = parse_number<std::size_t>(key, value);
        else throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    return parse_config(in);
}

}  // namespace fbmc
