#include "gkc/cli.hpp"

int main(int argc, char** argv)
{
    return gkc::cli::run(argc, argv);
}
