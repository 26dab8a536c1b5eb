int trailing_spaces = 1;   
	
   
int x2 = 2;	


