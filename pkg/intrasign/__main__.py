from intrasign.cli import entry

entry()
