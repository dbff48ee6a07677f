#pragma once

#include <cstdlib>
#include <string>

// Fixture directory, injected by ctest; falls back to a source-relative
// path for direct binary runs from the repo root.
inline std::string data_path(const std::string& name) {
    const char* dir = std::getenv("MEDGRAPH_DATA");
    return (dir ? std::string(dir) : std::string("tests/data")) + "/" + name;
}
