# In-sandbox runner: confines a student program before executing it.
# argv: <scratch dir> <source file>. stdin/stdout/stderr are wired by the host.
import os
import sys
import traceback

SCRATCH = os.path.realpath(sys.argv[1])
SOURCE = sys.argv[2]
MEMORY_EXIT = 99
WRITE_FLAGS = os.O_WRONLY | os.O_RDWR | os.O_CREAT | os.O_TRUNC | os.O_APPEND
BLOCKED = ("socket.", "subprocess.", "os.exec", "os.posix_spawn", "os.spawn",
           "os.fork", "os.forkpty", "os.system", "os.kill", "os.killpg",
           "ctypes.", "pty.", "webbrowser.", "urllib.Request", "ftplib.",
           "smtplib.", "http.client.", "nntplib.", "telnetlib.")
PATH_EVENTS = {"os.remove", "os.rename", "os.mkdir", "os.rmdir", "os.chmod",
               "os.chown", "os.symlink", "os.link", "os.truncate", "os.utime",
               "shutil.rmtree", "shutil.move", "shutil.copyfile", "shutil.copytree"}


def inside(path):
    if isinstance(path, int):
        return True
    try:
        real = os.path.realpath(os.fsdecode(path))
    except Exception:
        return False
    return real == SCRATCH or real.startswith(SCRATCH + os.sep)


def hook(event, args):
    if event.startswith(BLOCKED):
        raise PermissionError("sandbox: %s is not permitted" % event)
    if event == "open":
        path, mode, flags = args
        writing = (mode is not None and any(c in mode for c in "wax+")) or (
            mode is None and isinstance(flags, int) and flags & WRITE_FLAGS)
        if writing and not inside(path):
            raise PermissionError("sandbox: write outside scratch: %r" % (path,))
    elif event in PATH_EVENTS:
        targets = [a for a in args if isinstance(a, (str, bytes, os.PathLike))]
        if not all(inside(t) for t in targets):
            raise PermissionError("sandbox: %s outside scratch" % event)


with open(SOURCE, "r", encoding="utf-8") as fh:
    code = compile(fh.read(), "solution.py", "exec")

sys.addaudithook(hook)
status = 0
try:
    exec(code, {"__name__": "__main__", "__builtins__": __builtins__})
except SystemExit as exc:
    status = exc.code if isinstance(exc.code, int) else (0 if exc.code is None else 1)
except MemoryError:
    sys.stderr.write("MemoryError: memory limit exceeded\n")
    status = MEMORY_EXIT
except BaseException:
    traceback.print_exc()
    status = 1
try:
    sys.stdout.flush()
    sys.stderr.flush()
except Exception:
    pass
os._exit(status)
