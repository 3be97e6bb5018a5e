from slipt_lab.cli import main

main()
