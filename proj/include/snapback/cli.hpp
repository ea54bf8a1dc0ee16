#pragma once
#include <string>
#include <vector>
namespace snapback { inline int run(const std::vector<std::string>&) { return 1; } }
