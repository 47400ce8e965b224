#include <string>
#include <vector>

#include "implink/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return implink::cli::run(std::move(args));
}
