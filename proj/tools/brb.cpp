#include "brb/cli.hpp"

int main(int argc, char** argv) {
    return brb::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
