#pragma once

#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>

namespace fseg::log {

enum class Level { Debug, Info, Warn, Error };

using Field = std::pair<std::string_view, std::string>;
using Sink = std::function<void(std::string_view line)>;

/// Emits `level event=<event> key=value ...` as one line. Values containing
/// spaces or quotes are double-quoted.
void emit(Level level, std::string_view event, std::initializer_list<Field> fields = {});

inline void debug(std::string_view event, std::initializer_list<Field> fields = {}) { emit(Level::Debug, event, fields); }
inline void info(std::string_view event, std::initializer_list<Field> fields = {}) { emit(Level::Info, event, fields); }
inline void warn(std::string_view event, std::initializer_list<Field> fields = {}) { emit(Level::Warn, event, fields); }
inline void error(std::string_view event, std::initializer_list<Field> fields = {}) { emit(Level::Error, event, fields); }

/// Lines below `level` are dropped. Default: Info.
void set_level(Level level);

/// Replaces the stderr sink; returns the previous one. An empty sink restores stderr.
Sink set_sink(Sink sink);

}  // namespace fseg::log
