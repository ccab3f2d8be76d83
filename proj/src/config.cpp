#include "agp/config.hpp"

#include <fstream>
#include <sstream>

#include "agp/errors.hpp"

namespace agp {

namespace {

std::string strip(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config: " + key + " expects a boolean, got \"" + v + "\"");
}

long long to_int(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        long long out = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (...) {
        throw ConfigError("config: " + key + " expects an integer, got \"" + v + "\"");
    }
}

double to_double(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (...) {
        throw ConfigError("config: " + key + " expects a number, got \"" + v + "\"");
    }
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(v);
    while (std::getline(is, cur, ',')) {
        cur = strip(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

}  // namespace

ConfigTable parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    ConfigTable table;
    std::string section;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = strip(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(path + ":" + std::to_string(line_no) + ": malformed section");
            section = strip(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        std::string key = strip(line.substr(0, eq));
        std::string value = strip(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
        table[section][key] = value;
    }
    return table;
}

AppConfig config_from_table(const ConfigTable& table) {
    AppConfig cfg;
    auto get = [&](const std::string& section, const std::string& key) -> const std::string* {
        auto s = table.find(section);
        if (s == table.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        return &k->second;
    };

    if (auto v = get("", "backend")) cfg.backend = *v;
    if (cfg.backend != "mock" && cfg.backend != "http")
        throw ConfigError("config: backend must be \"mock\" or \"http\"");
    if (auto v = get("", "run_dir")) cfg.run_dir = *v;

    if (auto v = get("http", "base_url")) cfg.http.base_url = *v;
    if (auto v = get("http", "model")) cfg.http.model = *v;
    if (auto v = get("http", "api_key_env")) cfg.http.api_key_env = *v;
    if (auto v = get("http", "timeout_seconds"))
        cfg.http.timeout_seconds = static_cast<int>(to_int(*v, "http.timeout_seconds"));
    if (auto v = get("http", "requests_per_minute"))
        cfg.requests_per_minute = static_cast<int>(to_int(*v, "http.requests_per_minute"));
    if (auto v = get("http", "max_retries"))
        cfg.max_retries = static_cast<int>(to_int(*v, "http.max_retries"));

    if (table.count("world")) {
        cfg.has_world = true;
        if (auto v = get("world", "seed"))
            cfg.world.seed = static_cast<std::uint64_t>(to_int(*v, "world.seed"));
        if (auto v = get("world", "genres")) cfg.world.genre_vocabulary = split_list(*v);
        if (auto v = get("world", "n_users"))
            cfg.world.n_users = static_cast<int>(to_int(*v, "world.n_users"));
        if (auto v = get("world", "n_items"))
            cfg.world.n_items = static_cast<int>(to_int(*v, "world.n_items"));
        if (auto v = get("world", "history_length"))
            cfg.world.history_length = static_cast<int>(to_int(*v, "world.history_length"));
        if (auto v = get("world", "list_length"))
            cfg.world.list_length = static_cast<int>(to_int(*v, "world.list_length"));
        if (auto v = get("world", "noise_rate"))
            cfg.world.noise_rate = to_double(*v, "world.noise_rate");
    }

    if (auto v = get("data", "users")) cfg.users_path = *v;
    if (auto v = get("data", "rankings")) cfg.rankings_path = *v;
    if (auto v = get("data", "n_train")) cfg.n_train = static_cast<int>(to_int(*v, "data.n_train"));
    if (auto v = get("data", "n_eval")) cfg.n_eval = static_cast<int>(to_int(*v, "data.n_eval"));
    if (auto v = get("data", "split_seed"))
        cfg.split_seed = static_cast<std::uint64_t>(to_int(*v, "data.split_seed"));
    if (auto v = get("data", "allow_overlap")) cfg.allow_overlap = to_bool(*v, "data.allow_overlap");

    if (auto v = get("train", "batch_size"))
        cfg.train.batch_size = static_cast<int>(to_int(*v, "train.batch_size"));
    if (auto v = get("train", "history_len"))
        cfg.train.history_len = static_cast<int>(to_int(*v, "train.history_len"));
    if (auto v = get("train", "max_epochs"))
        cfg.train.max_epochs = static_cast<int>(to_int(*v, "train.max_epochs"));
    if (auto v = get("train", "patience"))
        cfg.train.patience = static_cast<int>(to_int(*v, "train.patience"));
    if (auto v = get("train", "summarization"))
        cfg.train.summarization_enabled = to_bool(*v, "train.summarization");
    if (auto v = get("train", "pbf")) cfg.train.pbf_enabled = to_bool(*v, "train.pbf");
    if (auto v = get("train", "seed"))
        cfg.train.seed = static_cast<std::uint64_t>(to_int(*v, "train.seed"));
    if (auto v = get("train", "parallelism"))
        cfg.train.parallelism = static_cast<int>(to_int(*v, "train.parallelism"));

    if (auto v = get("profile", "seed_template")) cfg.seed_template = *v;
    return cfg;
}

AppConfig load_config(const std::string& path) {
    return config_from_table(parse_config_file(path));
}

}  // namespace agp
