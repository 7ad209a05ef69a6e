#pragma once

#include <cstdlib>
#include <memory>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace starquery {

/// Shared stderr logger. Level comes from STARQUERY_LOG (trace, debug, info,
/// warn, error, off); default is warn.
inline spdlog::logger& logger() {
    static std::shared_ptr<spdlog::logger> instance = [] {
        auto l = spdlog::stderr_color_mt("starquery");
        l->set_pattern("[%l] %v");
        const char* env = std::getenv("STARQUERY_LOG");
        l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
        return l;
    }();
    return *instance;
}

}  // namespace starquery
