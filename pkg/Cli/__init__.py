"""命令行入口：python -m Cli.main"""
