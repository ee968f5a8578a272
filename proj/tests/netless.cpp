// Brings up loopback in a fresh network namespace, then runs the command.
// Meant to be started under `unshare -rn`.
#include <net/if.h>
#include <sys/ioctl.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: netless <command> [args...]\n");
        return 2;
    }
    const int fd = socket(AF_INET, SOCK_DGRAM, 0);
    ifreq req{};
    std::strncpy(req.ifr_name, "lo", IFNAMSIZ - 1);
    if (fd < 0 || ioctl(fd, SIOCGIFFLAGS, &req) != 0) {
        std::perror("netless: lo");
        return 2;
    }
    req.ifr_flags |= IFF_UP | IFF_RUNNING;
    if (ioctl(fd, SIOCSIFFLAGS, &req) != 0) {
        std::perror("netless: lo up");
        return 2;
    }
    close(fd);
    execvp(argv[1], argv + 1);
    std::perror("netless: exec");
    return 127;
}
