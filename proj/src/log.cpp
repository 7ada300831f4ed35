#include "fseg/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace fseg::log {

namespace {

std::mutex g_mutex;
Sink g_sink;
std::atomic<Level> g_level{Level::Info};

std::string_view level_name(Level level) {
    switch (level) {
        case Level::Debug: return "debug";
        case Level::Info: return "info";
        case Level::Warn: return "warn";
        case Level::Error: return "error";
    }
    return "info";
}

void append_value(std::string& line, std::string_view value) {
    const bool quote = value.empty() || value.find_first_of(" \t\"=") != std::string_view::npos;
    if (!quote) {
        line += value;
        return;
    }
    line += '"';
    for (const char c : value) {
        if (c == '"' || c == '\\') {
            line += '\\';
        }
        line += c;
    }
    line += '"';
}

}  // namespace

void emit(Level level, std::string_view event, std::initializer_list<Field> fields) {
    if (level < g_level.load()) {
        return;
    }
    std::string line(level_name(level));
    line += " event=";
    append_value(line, event);
    for (const auto& [key, value] : fields) {
        line += ' ';
        line += key;
        line += '=';
        append_value(line, value);
    }
    const std::lock_guard lock(g_mutex);
    if (g_sink) {
        g_sink(line);
    } else {
        std::cerr << line << '\n';
    }
}

void set_level(Level level) { g_level.store(level); }

Sink set_sink(Sink sink) {
    const std::lock_guard lock(g_mutex);
    return std::exchange(g_sink, std::move(sink));
}

}  // namespace fseg::log
