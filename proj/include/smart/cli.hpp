#ifndef SMART_CLI_HPP
#define SMART_CLI_HPP

namespace smart
{

/// Entry point of the `smart` tool. Returns 0 on success, 2 on usage or
/// configuration errors and 1 on numerical failures.
int cli_main(int argc, char** argv);

} // namespace smart

#endif // SMART_CLI_HPP
