import argparse
import logging
import sys

from . import __version__
from .config import ScorerConfig
from .finetune import finetune
from .serve import serve


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="reference-scorer",
        description="Fine-tune and serve a pretrained sequence-pair "
                    "classifier over the line-delimited JSON scoring protocol.")
    parser.add_argument("--version", action="version",
                        version=f"reference-scorer {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("finetune", help="train a pair classifier on a pairs file")
    p.add_argument("--pairs", required=True, help="formlink pairs JSONL file")
    p.add_argument("--out", required=True, help="model output directory")
    p.add_argument("--model-name", default=ScorerConfig.model_name)
    p.add_argument("--max-length", type=int, default=ScorerConfig.max_length)
    p.add_argument("--epochs", type=int, default=ScorerConfig.epochs)
    p.add_argument("--learning-rate", type=float, default=ScorerConfig.learning_rate)
    p.add_argument("--seed", type=int, default=ScorerConfig.seed)
    p.add_argument("--batch-size", type=int, default=ScorerConfig.batch_size)
    p.add_argument("--device", default="auto")

    p = sub.add_parser("serve", help="answer scoring requests on stdin/stdout")
    p.add_argument("model_dir")
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--device", default=None)
    p.add_argument("--max-length", type=int, default=None)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(message)s")

    if args.command == "finetune":
        config = ScorerConfig(model_name=args.model_name,
                              max_length=args.max_length, epochs=args.epochs,
                              learning_rate=args.learning_rate, seed=args.seed,
                              batch_size=args.batch_size, device=args.device)
        out = finetune(args.pairs, args.out, config)
        print(f"model written to {out}", file=sys.stderr)
        return 0
    return serve(args.model_dir, batch_size=args.batch_size,
                 device=args.device, max_length=args.max_length)


if __name__ == "__main__":
    sys.exit(main())
