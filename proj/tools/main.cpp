#include <smart/cli.hpp>

int main(int argc, char** argv)
{
    return smart::cli_main(argc, argv);
}
