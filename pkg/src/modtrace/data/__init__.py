"""Report rows, report files and plot series."""
