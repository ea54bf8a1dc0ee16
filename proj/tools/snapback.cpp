#include "snapback/cli.hpp"

int main(int argc, char** argv) {
    return snapback::run(std::vector<std::string>(argv + 1, argv + argc));
}
