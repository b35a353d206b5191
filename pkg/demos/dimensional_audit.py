"""Print the symbolic dimensional check of every step in the coupling chains."""

from spinnoise.dimensions import audit, closure


def main():
    for item in audit():
        print(f"{'ok ' if item.ok else 'BAD'} {item.chain:9s} {item.name}")
    print(f"closure: {closure()}")


if __name__ == "__main__":
    main()
